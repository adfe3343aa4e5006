#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "slabdsa/linalg.hpp"
#include "slabdsa/mesh.hpp"
#include "slabdsa/transport.hpp"

namespace slabdsa {

// H^(d) = H_<=^(d) + H_>^(d), where H_> holds the face couplings whose source
// element is processed later in the ordering.
struct SplitSystem {
  const TransportSystem* sys = nullptr;
  SweepOrdering ordering;
  std::vector<SpMat> H_le, H_gt;
};

SplitSystem split_H(const TransportSystem& sys, const SweepOrdering& ord);

// k lagged sweeps per direction with the right-hand side frozen:
//   x_{l+1} = (I + eps H_<=)^-1 (rhs - eps H_> x_l),  x_0 = start (zero when null).
// From a zero start this applies sum_{l<k} X^l (I + eps H_<=)^-1 with
// X = -eps (I + eps H_<=)^-1 H_>.
AngularFlux lagged_sweeps(const SplitSystem& split, int k, const AngularFlux& rhs,
                          const AngularFlux* start = nullptr);

struct LaggedIdentityReport {
  int n = 0;
  double eps = 0.0;
  int k = 0;
  double discrepancy = 0.0;  // max entrywise |lhs - rhs|
  double scale = 0.0;        // max entrywise |rhs|

  void write_text(std::ostream& out) const;
  void write_csv_row(std::ostream& out, bool header) const;
};

// Checks M_k^-1 B = (I - X^k)(I + eps H)^-1 B densely, with
// M_k^-1 = sum_{l<k} X^l (I + eps H_<=)^-1 and H = H_<= + H_>.
LaggedIdentityReport verify_lagged_identity(const Mat& H_le, const Mat& H_gt, const Mat& B, double eps, int k);

// Outer DSA iteration with n_inner extra lagged sweeps per outer step.
// With update_flux_each_sweep the scalar flux is refreshed between the inner
// sweeps and the correction sees the change produced by the last one;
// otherwise the scattering source stays frozen for all n_inner + 1 sweeps.
IterationResult iterate_with_inners(const TransportSystem& sys, const SweepOrdering& ord,
                                    const FluxCorrection* correction, int n_inner,
                                    bool update_flux_each_sweep, int max_iters, double tol,
                                    const AngularFlux* reference = nullptr);

}  // namespace slabdsa
