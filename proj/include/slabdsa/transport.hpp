#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "slabdsa/dg.hpp"
#include "slabdsa/linalg.hpp"
#include "slabdsa/mesh.hpp"
#include "slabdsa/quadrature.hpp"

namespace slabdsa {

// Coefficients of the epsilon-scaled slab equation
//   mu psi' + (sigma_t/eps) psi = (1/Sigma)(sigma_t/eps - eps sigma_a) phi + eps q.
// The discrete source and inflow vectors enter with the 1/Sigma prefactor.
struct ProblemData {
  Coefficient sigma_t = Coefficient::constant(1.0);
  Coefficient sigma_a = Coefficient::constant(0.0);
  std::function<double(double x, double mu)> source = [](double, double) { return 0.0; };
  int source_degree = -1;
  std::function<double(double x, double mu)> inflow = [](double, double) { return 0.0; };
};

class TransportSystem {
 public:
  TransportSystem(DGSpace space, DirectionSet dirs, double eps, const ProblemData& data);

  const DGSpace& space() const { return space_; }
  const DirectionSet& dirs() const { return dirs_; }
  double eps() const { return eps_; }
  int n_dofs() const { return space_.n_dofs(); }
  int n_angles() const { return dirs_.size(); }
  double normalization() const { return dirs_.normalization; }

  SpMat Mt, Ma, G;
  std::vector<SpMat> F, Ft;  // per direction
  Moments moments;
  std::vector<Vec> q, qinc;  // per direction

  Vec mt_apply(const Vec& x) const;
  Vec mt_solve(const Vec& x) const;
  SpMat mt_inverse() const;

  // Solves (I + eps H_<=^(d)) x = rhs - eps H_>^(d) lagged by block forward
  // substitution in the given order. Couplings classified upper read
  // `lagged` (zero when null).
  Vec solve_lower(int d, const SweepOrdering& ord, const Vec& rhs, const Vec* lagged) const;

  // (1/Sigma)(I - eps^2 M_t^-1 M_a) phi, the frozen scattering part of every sweep input.
  Vec scatter_rhs(const Vec& phi) const;
  // (1/Sigma) eps M_t^-1 (q_inc + eps q) for direction d.
  const Vec& source_rhs(int d) const { return src_rhs_[d]; }
  bool has_source() const;

 private:
  struct Coupling {
    int from;
    Mat block;  // F^(d) entries (rows in e, cols in `from`)
  };
  DGSpace space_;
  DirectionSet dirs_;
  double eps_;
  std::vector<Mat> mt_blocks_, ma_blocks_;
  std::vector<Eigen::LLT<Mat>> mt_llt_;
  std::vector<std::vector<Eigen::PartialPivLU<Mat>>> diag_lu_;     // [d][e]
  std::vector<std::vector<std::vector<Coupling>>> couplings_;       // [d][e]
  std::vector<Vec> src_rhs_;
};

TransportSystem build_system(const DGSpace& space, const DirectionSet& dirs, double eps,
                             const ProblemData& data);

// H^(d) = M_t^-1 (mu_d G + F^(d)).
SpMat build_H(const TransportSystem& sys, int d);

// Exact transport sweep: (I + eps H^(d)) x = rhs. The ordering must leave
// H_> empty for direction d.
Vec sweep(const TransportSystem& sys, int d, const SweepOrdering& ord, const Vec& rhs);

Vec scalar_flux(const TransportSystem& sys, const AngularFlux& psi);
Vec apply_S_eps(const TransportSystem& sys, const SweepOrdering& ord, const Vec& phi);
// s = sum_d w_d (I + eps H^(d))^-1 (1/Sigma) eps M_t^-1 (q_inc + eps q).
Vec source_vector(const TransportSystem& sys, const SweepOrdering& ord);

// max_d || (mu G + F + M_t/eps) psi_d - (1/Sigma)(M_t/eps - eps M_a) phi
//          - (1/Sigma)(q_inc + eps q) ||_inf.
double compute_residual(const TransportSystem& sys, const AngularFlux& psi);

// Sparse direct solve of the fully coupled angular system.
AngularFlux direct_solve(const TransportSystem& sys);

// ---- iteration -----------------------------------------------------------

// A DSA-style correction. Given the change in scalar flux produced by the
// latest sweeps, returns the additive update.
class FluxCorrection {
 public:
  virtual ~FluxCorrection() = default;
  virtual Vec correction(const Vec& diff) const = 0;
};

struct IterationRow {
  int iter = 0;
  double error_inf = 0.0;     // max_d ||psi_{j+1} - psi_j||_inf
  double residual_inf = 0.0;  // compute_residual of the sweep output
  long cumulative_sweeps = 0;
  double reference_error = 0.0;  // ||psi_ref - psi_{j+1}||_inf, NaN without a reference
};

struct IterationHistory {
  std::vector<IterationRow> rows;
  bool converged = false;
  bool diverged = false;
  std::string stop_reason;

  int iterations() const { return static_cast<int>(rows.size()); }
  double final_error() const;
  double final_residual() const;
  double min_error() const;
  long sweeps() const { return rows.empty() ? 0 : rows.back().cumulative_sweeps; }
  // Iteration index at which error_inf first dropped to <= tol, or -1.
  int first_below(double tol) const;

  // iter,error_inf,residual_inf,cumulative_sweeps with 17 significant digits.
  void write_csv(std::ostream& out) const;
  // Keeps every g-th row (and the last), renumbered by group.
  IterationHistory grouped(int g) const;
};

// Divergence: non-finite error, or growth by more than 10x across the last
// five iterations with every one of them increasing.
bool divergence_detected(const std::vector<IterationRow>& rows);

struct IterationOptions {
  int max_iters = 40;
  double tol = 1e-12;
  int n_inner = 0;
  bool update_flux_each_sweep = false;
  const AngularFlux* reference = nullptr;
};

struct IterationResult {
  AngularFlux psi;
  Vec phi;
  IterationHistory history;
};

// Outer loop shared by plain and lagged-sweep iterations. Each outer step runs
// n_inner + 1 sweeps per direction (lagged when the ordering has H_>
// couplings), then applies the correction to the scalar-flux change.
IterationResult run_iteration(const TransportSystem& sys, const SweepOrdering& ord,
                              const FluxCorrection* correction, const IterationOptions& opts);

// phi_{j+1} = S phi_j + s with an optional correction; requires exact sweeps.
IterationResult source_iteration(const TransportSystem& sys, const SweepOrdering& ord,
                                 const FluxCorrection* correction, int max_iters, double tol,
                                 const AngularFlux* reference = nullptr);

}  // namespace slabdsa
