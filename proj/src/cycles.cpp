#include "slabdsa/cycles.hpp"

#include <cstdio>
#include <ostream>

#include "slabdsa/errors.hpp"

namespace slabdsa {

SplitSystem split_H(const TransportSystem& sys, const SweepOrdering& ord) {
  if (ord.n_directions() != sys.n_angles() || ord.n_elements() != sys.space().n_elements())
    fail(ErrorCode::InvalidArgument, "ordering does not match the system");
  SplitSystem s;
  s.sys = &sys;
  s.ordering = ord;
  const int n = sys.n_dofs(), nl = sys.space().n_local();
  const SpMat minv = sys.mt_inverse();
  for (int d = 0; d < sys.n_angles(); ++d) {
    Triplets lower, upper;
    const SpMat a = sys.dirs().mu[d] * sys.G + sys.F[d];
    for (int k = 0; k < a.outerSize(); ++k) {
      for (SpMat::InnerIterator it(a, k); it; ++it) {
        const int e = static_cast<int>(it.row()) / nl, from = static_cast<int>(it.col()) / nl;
        if (e != from && ord.is_upper(d, e, from))
          upper.emplace_back(it.row(), it.col(), it.value());
        else
          lower.emplace_back(it.row(), it.col(), it.value());
      }
    }
    SpMat al(n, n), au(n, n);
    al.setFromTriplets(lower.begin(), lower.end());
    au.setFromTriplets(upper.begin(), upper.end());
    s.H_le.push_back(minv * al);
    s.H_gt.push_back(minv * au);
  }
  return s;
}

AngularFlux lagged_sweeps(const SplitSystem& split, int k, const AngularFlux& rhs, const AngularFlux* start) {
  if (k < 1) fail(ErrorCode::InvalidArgument, "lagged sweeps need k >= 1");
  const TransportSystem& sys = *split.sys;
  AngularFlux x(sys.n_angles());
  for (int d = 0; d < sys.n_angles(); ++d) {
    x[d] = start ? (*start)[d] : Vec::Zero(sys.n_dofs());
    for (int l = 0; l < k; ++l) x[d] = sys.solve_lower(d, split.ordering, rhs[d], &x[d]);
  }
  return x;
}

void LaggedIdentityReport::write_text(std::ostream& out) const {
  char buf[200];
  std::snprintf(buf, sizeof buf, "lagged-sweep identity: n=%d eps=%.3e k=%d discrepancy=%.3e (scale %.3e)\n", n,
                eps, k, discrepancy, scale);
  out << buf;
}

void LaggedIdentityReport::write_csv_row(std::ostream& out, bool header) const {
  if (header) out << "n,eps,k,discrepancy,scale\n";
  char buf[200];
  std::snprintf(buf, sizeof buf, "%d,%.16e,%d,%.16e,%.16e\n", n, eps, k, discrepancy, scale);
  out << buf;
}

LaggedIdentityReport verify_lagged_identity(const Mat& H_le, const Mat& H_gt, const Mat& B, double eps, int k) {
  const Eigen::Index n = H_le.rows();
  if (H_le.cols() != n || H_gt.rows() != n || H_gt.cols() != n || B.rows() != n)
    fail(ErrorCode::InvalidInstance, "lagged identity: inconsistent matrix sizes");
  if (k < 1) fail(ErrorCode::InvalidInstance, "lagged identity: k must be >= 1");
  const Mat I = Mat::Identity(n, n);
  Eigen::FullPivLU<Mat> lu_le(I + eps * H_le);
  Eigen::FullPivLU<Mat> lu_full(I + eps * (H_le + H_gt));
  if (!lu_le.isInvertible() || !lu_full.isInvertible())
    fail(ErrorCode::InvalidInstance, "lagged identity: I + eps H is singular");

  const Mat Ale_inv = lu_le.inverse();
  const Mat X = -eps * Ale_inv * H_gt;
  Mat series = Mat::Zero(n, n), Xl = I;
  for (int l = 0; l < k; ++l) {
    series += Xl;
    Xl = X * Xl;  // after the loop Xl = X^k
  }
  const Mat lhs = series * Ale_inv * B;
  const Mat rhs = (I - Xl) * lu_full.solve(B);
  LaggedIdentityReport r;
  r.n = static_cast<int>(n);
  r.eps = eps;
  r.k = k;
  r.discrepancy = max_abs(Mat(lhs - rhs));
  r.scale = max_abs(rhs);
  return r;
}

IterationResult iterate_with_inners(const TransportSystem& sys, const SweepOrdering& ord,
                                    const FluxCorrection* correction, int n_inner,
                                    bool update_flux_each_sweep, int max_iters, double tol,
                                    const AngularFlux* reference) {
  IterationOptions opts;
  opts.max_iters = max_iters;
  opts.tol = tol;
  opts.n_inner = n_inner;
  opts.update_flux_each_sweep = update_flux_each_sweep;
  opts.reference = reference;
  return run_iteration(sys, ord, correction, opts);
}

}  // namespace slabdsa
