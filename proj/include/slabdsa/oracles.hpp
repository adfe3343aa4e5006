#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "slabdsa/cycles.hpp"
#include "slabdsa/dsa.hpp"
#include "slabdsa/linalg.hpp"
#include "slabdsa/transport.hpp"

namespace slabdsa {

struct OracleReport {
  std::string name;
  std::string instance;
  double measured = 0.0;
  double bound = 0.0;  // upper bound, or lower edge of a band
  double bound_hi = 0.0;  // upper edge of a band (may be inf); 0 for upper-bound checks
  bool pass = false;
  std::string note;
};

void write_reports_csv(const std::vector<OracleReport>& reports, std::ostream& out);
void write_reports_text(const std::vector<OracleReport>& reports, std::ostream& out);

// ---- dense operators (small instances only) --------------------------------

constexpr int kDenseLimit = 2000;

Mat dense(const SpMat& a);
// (I + eps H^(d))^-1 by dense inversion.
Mat dense_sweep_inverse(const TransportSystem& sys, int d);
// S_eps = sum_d w_d (I + eps H^(d))^-1 (1/Sigma)(I - eps^2 M_t^-1 M_a).
Mat dense_S(const TransportSystem& sys);
// Angular-space operators of size n_dofs * n_angles.
Mat dense_P0(const TransportSystem& sys);
Mat dense_W(const TransportSystem& sys);
// T_eps = (I + eps H)^-1 (I - eps^2 M_t^-1 M_a) P0.
Mat dense_T(const TransportSystem& sys);
// T~ = T + X^k (I - T) with X = -eps (I + eps H_<=)^-1 H_>: the operator of
// k lagged sweeps started from the current iterate with the scattering term
// held fixed.
Mat dense_T_tilde(const SplitSystem& split, int k);
// E_eps applied to the identity.
Mat dense_E_eps(const AdditiveOperator& op, int n);
// Block-diagonal angular operator diag_d(A_d).
Mat block_diag(const std::vector<Mat>& blocks);
// Maps phi to the angular vector with every block phi / Sigma.
Mat broadcast(const TransportSystem& sys);
// Maps psi to sum_d w_d psi_d.
Mat angular_sum(const TransportSystem& sys);

// ---- expansion and rate checks -----------------------------------------------

// || D^-1 - [E_P/eps + (I - E_P D) E_Q (I - D E_P)] ||_2 for D^ = F0 + eps D,
// with P spanning null(F0) and Q spanning a complement.
double singular_perturbation_error(const Mat& F0, const Mat& D, const Mat& P, const Mat& Q, double eps);

// Runs singular_perturbation_error over eps_list and checks each decade ratio
// lies in [3, 30].
OracleReport check_singular_perturbation(const Mat& F0, const Mat& D, const Mat& P, const Mat& Q,
                                         const std::vector<double>& eps_list);

// Random instance: n x n, F0 symmetric PSD with null space of dimension k and
// orthonormal bases P (null) and Q (complement), D nonsymmetric with P^T D P
// invertible, D1 supported on range(Q) in both factors.
struct PerturbationInstance {
  Mat F0, D, D1, P, Q;
};
PerturbationInstance random_perturbation_instance(int n, int k, std::uint64_t seed);

// Remainder of the second-order expansion of (I - T_eps) against the
// explicit bound, for eps with eps ||H^(d)|| < 1.
struct NeumannSample {
  double eps = 0.0;
  double remainder = 0.0;
  double bound = 0.0;
  bool hypothesis = false;
};
std::vector<NeumannSample> neumann_remainder(const ProblemData& data, const DGSpace& space,
                                             const DirectionSet& dirs, const std::vector<double>& eps_list,
                                             std::uint64_t seed);

// cond_W(I - T_eps) = cond_2(W^{1/2} (I - T_eps) W^{-1/2}).
double weighted_condition(const TransportSystem& sys);

// || (eps^2 D_eps)^-1 M_t (I - S_eps) - I ||_2.
double sip_preconditioned_error(const TransportSystem& sys);
// || (1/eps) E_eps M_t (I - S_eps) - I ||_2.
double additive_preconditioned_error(const TransportSystem& sys);

// max_d || T~ - T ||_2 for k lagged sweeps.
double lagged_operator_gap(const TransportSystem& sys, const SweepOrdering& ord, int k);
// || (1/eps) E_eps M_t P0 (T - T~) P0 ||_2 acting on scalar fluxes.
double lagged_preconditioned_gap(const TransportSystem& sys, const SweepOrdering& ord, int k);

// Longest run of consecutive interior faces whose coupling is lagged, over
// all directions. (H_>)^k has a nonzero leading term only when some run
// reaches k, which is when the gap T~ - T decays no faster than eps^k.
int longest_upper_chain(const SweepOrdering& ord);
// First adversarial ordering from seed, seed+1, ... whose longest lagged run
// is at least k.
SweepOrdering chained_adversarial_ordering(const Mesh& mesh, const DirectionSet& dirs, double fraction,
                                           std::uint64_t seed, int k);

// Aggregated identity checks (quadrature, integration by parts, null space,
// P0 projection) on the given system.
OracleReport check_quadrature_and_nullspace_identities(const TransportSystem& sys);

OracleReport check_neumann_remainder(const ProblemData& data, const DGSpace& space,
                                     const DirectionSet& dirs, const std::vector<double>& eps_list,
                                     std::uint64_t seed);

OracleReport check_condition_scaling(const ProblemData& data, const DGSpace& space, const DirectionSet& dirs,
                                     const std::vector<double>& eps_list);

// Full enumerated suite, deterministic for a given seed.
std::vector<OracleReport> run_oracle_suite(std::uint64_t seed = 2024);

}  // namespace slabdsa
