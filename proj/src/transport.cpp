#include "slabdsa/transport.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>

#include "slabdsa/errors.hpp"

namespace slabdsa {

TransportSystem::TransportSystem(DGSpace space, DirectionSet dirs, double eps, const ProblemData& data)
    : space_(std::move(space)), dirs_(std::move(dirs)), eps_(eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) fail(ErrorCode::InvalidArgument, "eps must be positive");
  if (dirs_.size() < 1) fail(ErrorCode::InvalidArgument, "empty direction set");
  const int n = space_.n_dofs(), nl = space_.n_local(), ne = space_.n_elements(), nd = dirs_.size();

  Mt = assemble_mass(space_, data.sigma_t, true);
  Ma = assemble_mass(space_, data.sigma_a, false);
  {
    const std::vector<double> mean_a = element_means(space_, data.sigma_a);
    for (int e = 0; e < ne; ++e)
      if (mean_a[e] < 0.0) fail(ErrorCode::InvalidCoefficient, "sigma_a must be nonnegative");
  }
  G = assemble_gradient(space_);
  moments = assemble_moments(space_, dirs_);
  for (int d = 0; d < nd; ++d) {
    F.push_back(assemble_face_upwind(space_, dirs_.mu[d]));
    Ft.push_back(assemble_face_adjoint(space_, dirs_.mu[d]));
  }

  // Source and inflow vectors.
  const std::vector<Face> fs = faces(space_);
  for (int d = 0; d < nd; ++d) {
    const double mu = dirs_.mu[d];
    q.push_back(assemble_load(space_, [&](double x) { return data.source(x, mu); }, data.source_degree));
    Vec inc = Vec::Zero(n);
    for (const Face& f : fs) {
      if (!f.boundary) continue;
      const double mun = mu * f.normal;
      if (mun >= 0.0) continue;  // outflow: -mu n (u/2) + |mu n| u/2 = 0
      const double val = data.inflow(f.x, mu);
      for (const auto& [i, c] : face_jump(space_, f)) inc(i) += std::abs(mun) * val * c;
    }
    qinc.push_back(inc);
  }

  // Element blocks for sweeps.
  mt_blocks_.resize(ne);
  ma_blocks_.resize(ne);
  mt_llt_.resize(ne);
  for (int e = 0; e < ne; ++e) {
    mt_blocks_[e] = Mat(Mt.block(e * nl, e * nl, nl, nl));
    ma_blocks_[e] = Mat(Ma.block(e * nl, e * nl, nl, nl));
    mt_llt_[e].compute(mt_blocks_[e]);
    if (mt_llt_[e].info() != Eigen::Success)
      fail(ErrorCode::NumericalBreakdown, "element mass matrix is not positive definite");
  }
  diag_lu_.assign(nd, {});
  couplings_.assign(nd, std::vector<std::vector<Coupling>>(ne));
  for (int d = 0; d < nd; ++d) {
    std::map<std::pair<int, int>, Mat> blocks;
    for (int k = 0; k < F[d].outerSize(); ++k) {
      for (SpMat::InnerIterator it(F[d], k); it; ++it) {
        const int er = static_cast<int>(it.row()) / nl, ec = static_cast<int>(it.col()) / nl;
        auto [pos, inserted] = blocks.try_emplace({er, ec}, Mat::Zero(nl, nl));
        pos->second(it.row() % nl, it.col() % nl) += it.value();
      }
    }
    diag_lu_[d].resize(ne);
    for (int e = 0; e < ne; ++e) {
      Mat a = mt_blocks_[e] + eps_ * dirs_.mu[d] * Mat(G.block(e * nl, e * nl, nl, nl));
      auto it = blocks.find({e, e});
      if (it != blocks.end()) a += eps_ * it->second;
      diag_lu_[d][e].compute(a);
      if (!(diag_lu_[d][e].rcond() > 1e-15))
        fail(ErrorCode::NumericalBreakdown, "singular element sweep block");
    }
    for (auto& [key, blk] : blocks)
      if (key.first != key.second) couplings_[d][key.first].push_back({key.second, blk});
  }

  src_rhs_.resize(nd);
  for (int d = 0; d < nd; ++d)
    src_rhs_[d] = (eps_ / dirs_.normalization) * mt_solve(qinc[d] + eps_ * q[d]);
}

TransportSystem build_system(const DGSpace& space, const DirectionSet& dirs, double eps,
                             const ProblemData& data) {
  return TransportSystem(space, dirs, eps, data);
}

Vec TransportSystem::mt_apply(const Vec& x) const {
  const int nl = space_.n_local();
  Vec y(x.size());
  for (int e = 0; e < space_.n_elements(); ++e) y.segment(e * nl, nl) = mt_blocks_[e] * x.segment(e * nl, nl);
  return y;
}

Vec TransportSystem::mt_solve(const Vec& x) const {
  const int nl = space_.n_local();
  Vec y(x.size());
  for (int e = 0; e < space_.n_elements(); ++e) y.segment(e * nl, nl) = mt_llt_[e].solve(x.segment(e * nl, nl));
  return y;
}

SpMat TransportSystem::mt_inverse() const {
  const int nl = space_.n_local();
  Triplets t;
  for (int e = 0; e < space_.n_elements(); ++e) {
    const Mat inv = mt_llt_[e].solve(Mat::Identity(nl, nl));
    for (int i = 0; i < nl; ++i)
      for (int j = 0; j < nl; ++j) t.emplace_back(e * nl + i, e * nl + j, inv(i, j));
  }
  SpMat m(n_dofs(), n_dofs());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

Vec TransportSystem::solve_lower(int d, const SweepOrdering& ord, const Vec& rhs, const Vec* lagged) const {
  const int nl = space_.n_local();
  Vec x = Vec::Zero(n_dofs());
  for (int e : ord.order(d)) {
    Vec b = mt_blocks_[e] * rhs.segment(e * nl, nl);
    for (const Coupling& c : couplings_[d][e]) {
      if (ord.is_upper(d, e, c.from)) {
        if (lagged) b -= eps_ * (c.block * lagged->segment(c.from * nl, nl));
      } else {
        b -= eps_ * (c.block * x.segment(c.from * nl, nl));
      }
    }
    x.segment(e * nl, nl) = diag_lu_[d][e].solve(b);
  }
  return x;
}

Vec TransportSystem::scatter_rhs(const Vec& phi) const {
  const int nl = space_.n_local();
  Vec y(phi.size());
  const double e2 = eps_ * eps_;
  for (int e = 0; e < space_.n_elements(); ++e) {
    const auto seg = phi.segment(e * nl, nl);
    y.segment(e * nl, nl) = seg - e2 * mt_llt_[e].solve(ma_blocks_[e] * seg);
  }
  return y / dirs_.normalization;
}

bool TransportSystem::has_source() const {
  for (const Vec& s : src_rhs_)
    if (s.lpNorm<Eigen::Infinity>() != 0.0) return true;
  return false;
}

SpMat build_H(const TransportSystem& sys, int d) {
  SpMat a = sys.dirs().mu[d] * sys.G + sys.F[d];
  SpMat h = sys.mt_inverse() * a;
  h.makeCompressed();
  return h;
}

Vec sweep(const TransportSystem& sys, int d, const SweepOrdering& ord, const Vec& rhs) {
  if (ord.upper_count(d) != 0)
    fail(ErrorCode::InvalidArgument, "ordering has lagged couplings; an exact sweep needs an upwind ordering");
  return sys.solve_lower(d, ord, rhs, nullptr);
}

Vec scalar_flux(const TransportSystem& sys, const AngularFlux& psi) {
  Vec phi = Vec::Zero(sys.n_dofs());
  for (int d = 0; d < sys.n_angles(); ++d) phi += sys.dirs().w[d] * psi[d];
  return phi;
}

Vec apply_S_eps(const TransportSystem& sys, const SweepOrdering& ord, const Vec& phi) {
  const Vec rhs = sys.scatter_rhs(phi);
  Vec out = Vec::Zero(sys.n_dofs());
  for (int d = 0; d < sys.n_angles(); ++d) out += sys.dirs().w[d] * sweep(sys, d, ord, rhs);
  return out;
}

Vec source_vector(const TransportSystem& sys, const SweepOrdering& ord) {
  Vec out = Vec::Zero(sys.n_dofs());
  for (int d = 0; d < sys.n_angles(); ++d) out += sys.dirs().w[d] * sweep(sys, d, ord, sys.source_rhs(d));
  return out;
}

double compute_residual(const TransportSystem& sys, const AngularFlux& psi) {
  const double eps = sys.eps(), inv_norm = 1.0 / sys.normalization();
  const Vec phi = scalar_flux(sys, psi);
  const Vec scat = inv_norm * (sys.Mt * phi / eps - eps * (sys.Ma * phi));
  double r = 0.0;
  for (int d = 0; d < sys.n_angles(); ++d) {
    const Vec res = sys.dirs().mu[d] * (sys.G * psi[d]) + sys.F[d] * psi[d] + sys.Mt * psi[d] / eps - scat -
                    inv_norm * (sys.qinc[d] + eps * sys.q[d]);
    r = std::max(r, res.lpNorm<Eigen::Infinity>());
  }
  return r;
}

AngularFlux direct_solve(const TransportSystem& sys) {
  const int n = sys.n_dofs(), nd = sys.n_angles();
  const double eps = sys.eps(), inv_norm = 1.0 / sys.normalization();
  const SpMat scat = inv_norm * (sys.Mt / eps - eps * sys.Ma);
  Triplets t;
  auto put = [&](const SpMat& a, int r0, int c0, double s) {
    for (int k = 0; k < a.outerSize(); ++k)
      for (SpMat::InnerIterator it(a, k); it; ++it) t.emplace_back(r0 + it.row(), c0 + it.col(), s * it.value());
  };
  Vec rhs(n * nd);
  for (int d = 0; d < nd; ++d) {
    const SpMat diag = sys.dirs().mu[d] * sys.G + sys.F[d] + sys.Mt / eps;
    put(diag, d * n, d * n, 1.0);
    for (int dp = 0; dp < nd; ++dp) put(scat, d * n, dp * n, -sys.dirs().w[dp]);
    rhs.segment(d * n, n) = inv_norm * (sys.qinc[d] + eps * sys.q[d]);
  }
  SpMat a(n * nd, n * nd);
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();
  Eigen::SparseLU<SpMat> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) fail(ErrorCode::Factorization, "direct solve: factorization failed");
  const Vec x = lu.solve(rhs);
  AngularFlux psi(nd);
  for (int d = 0; d < nd; ++d) psi[d] = x.segment(d * n, n);
  return psi;
}

// ---- history ---------------------------------------------------------------

double IterationHistory::final_error() const {
  return rows.empty() ? 0.0 : rows.back().error_inf;
}

double IterationHistory::final_residual() const {
  return rows.empty() ? 0.0 : rows.back().residual_inf;
}

double IterationHistory::min_error() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) m = std::min(m, r.error_inf);
  return rows.empty() ? 0.0 : m;
}

int IterationHistory::first_below(double tol) const {
  for (const auto& r : rows)
    if (r.error_inf <= tol) return r.iter;
  return -1;
}

void IterationHistory::write_csv(std::ostream& out) const {
  out << "iter,error_inf,residual_inf,cumulative_sweeps\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.16e,%.16e,%ld\n", r.iter, r.error_inf, r.residual_inf,
                  r.cumulative_sweeps);
    out << buf;
  }
}

IterationHistory IterationHistory::grouped(int g) const {
  if (g < 1) fail(ErrorCode::InvalidArgument, "group size must be >= 1");
  IterationHistory h;
  h.converged = converged;
  h.diverged = diverged;
  h.stop_reason = stop_reason;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if ((i + 1) % g == 0 || i + 1 == rows.size()) {
      IterationRow r = rows[i];
      r.iter = static_cast<int>(h.rows.size()) + 1;
      h.rows.push_back(r);
    }
  }
  return h;
}

bool divergence_detected(const std::vector<IterationRow>& rows) {
  if (rows.empty()) return false;
  if (!std::isfinite(rows.back().error_inf)) return true;
  const std::size_t n = rows.size();
  if (n < 6) return false;
  for (std::size_t i = n - 5; i < n; ++i)
    if (!(rows[i].error_inf > rows[i - 1].error_inf)) return false;
  return rows[n - 1].error_inf > 10.0 * rows[n - 6].error_inf;
}

// ---- iteration -------------------------------------------------------------

namespace {

double max_diff(const AngularFlux& a, const AngularFlux& b) {
  double m = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) m = std::max(m, (a[d] - b[d]).lpNorm<Eigen::Infinity>());
  return m;
}

// One pass of lagged sweeps for every direction with the given scattering rhs.
void sweep_all(const TransportSystem& sys, const SweepOrdering& ord, const Vec& scat, AngularFlux& psi) {
  for (int d = 0; d < sys.n_angles(); ++d) {
    const Vec rhs = scat + sys.source_rhs(d);
    psi[d] = sys.solve_lower(d, ord, rhs, &psi[d]);
  }
}

}  // namespace

IterationResult run_iteration(const TransportSystem& sys, const SweepOrdering& ord,
                              const FluxCorrection* correction, const IterationOptions& opts) {
  if (opts.n_inner < 0) fail(ErrorCode::InvalidArgument, "n_inner must be >= 0");
  if (opts.max_iters < 0) fail(ErrorCode::InvalidArgument, "max_iters must be >= 0");
  const int n = sys.n_dofs(), nd = sys.n_angles();
  IterationResult res;
  res.phi = Vec::Zero(n);
  res.psi.assign(nd, Vec::Zero(n));
  IterationHistory& hist = res.history;

  if (!sys.has_source()) {
    hist.converged = true;
    hist.stop_reason = "zero source";
    return res;
  }

  long sweeps = 0;
  AngularFlux psi = res.psi;
  Vec phi = res.phi;
  for (int j = 1; j <= opts.max_iters; ++j) {
    AngularFlux next = psi;
    Vec phi_in = phi;
    Vec phi_out;
    if (opts.update_flux_each_sweep) {
      for (int l = 0; l <= opts.n_inner; ++l) {
        sweep_all(sys, ord, sys.scatter_rhs(phi_in), next);
        sweeps += nd;
        phi_out = scalar_flux(sys, next);
        if (l < opts.n_inner) phi_in = phi_out;
      }
    } else {
      const Vec scat = sys.scatter_rhs(phi);
      for (int l = 0; l <= opts.n_inner; ++l) {
        sweep_all(sys, ord, scat, next);
        sweeps += nd;
      }
      phi_out = scalar_flux(sys, next);
    }
    phi = phi_out;
    if (correction) phi += correction->correction(phi_out - phi_in);

    IterationRow row;
    row.iter = j;
    row.error_inf = max_diff(next, psi);
    row.residual_inf = compute_residual(sys, next);
    row.cumulative_sweeps = sweeps;
    row.reference_error = opts.reference ? max_diff(*opts.reference, next)
                                         : std::numeric_limits<double>::quiet_NaN();
    psi = std::move(next);
    hist.rows.push_back(row);

    if (divergence_detected(hist.rows)) {
      hist.diverged = true;
      hist.stop_reason = "diverged";
      break;
    }
    if (row.error_inf <= opts.tol) {
      hist.converged = true;
      hist.stop_reason = "converged";
      break;
    }
  }
  if (!hist.converged && !hist.diverged) hist.stop_reason = "max_iters";

  // Angular flux consistent with the final scalar flux.
  res.phi = phi;
  res.psi = psi;
  if (phi.allFinite()) {
    const Vec scat = sys.scatter_rhs(phi);
    for (int l = 0; l <= (ord.triangular() ? 0 : opts.n_inner); ++l) sweep_all(sys, ord, scat, res.psi);
  }
  return res;
}

IterationResult source_iteration(const TransportSystem& sys, const SweepOrdering& ord,
                                 const FluxCorrection* correction, int max_iters, double tol,
                                 const AngularFlux* reference) {
  if (!ord.triangular())
    fail(ErrorCode::InvalidArgument, "source iteration needs exact sweeps; use iterate_with_inners");
  IterationOptions opts;
  opts.max_iters = max_iters;
  opts.tol = tol;
  opts.reference = reference;
  return run_iteration(sys, ord, correction, opts);
}

}  // namespace slabdsa
