#include "slabdsa/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "slabdsa/errors.hpp"

namespace slabdsa {

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string join_ratios(const std::vector<double>& r) {
  std::ostringstream s;
  for (std::size_t i = 0; i < r.size(); ++i) s << (i ? " " : "") << fmt("%.4g", r[i]);
  return s.str();
}

std::vector<double> decade_ratios(const std::vector<double>& values) {
  std::vector<double> r;
  for (std::size_t i = 1; i < values.size(); ++i) r.push_back(values[i - 1] / values[i]);
  return r;
}

OracleReport band_report(std::string name, std::string instance, const std::vector<double>& ratios, double lo,
                         double hi) {
  OracleReport rep;
  rep.name = std::move(name);
  rep.instance = std::move(instance);
  rep.bound = lo;
  rep.bound_hi = hi;
  rep.pass = !ratios.empty();
  double worst = ratios.empty() ? 0.0 : ratios.front();
  for (double x : ratios) {
    if (!(x >= lo && x <= hi)) {
      rep.pass = false;
      worst = x;
    }
  }
  rep.measured = worst;
  rep.note = "ratios " + join_ratios(ratios);
  return rep;
}

OracleReport upper_report(std::string name, std::string instance, double measured, double bound,
                          std::string note = {}) {
  OracleReport rep;
  rep.name = std::move(name);
  rep.instance = std::move(instance);
  rep.measured = measured;
  rep.bound = bound;
  rep.pass = measured <= bound;
  rep.note = std::move(note);
  return rep;
}

Mat random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = nd(rng);
  return m;
}

Vec random_vector(int n, std::mt19937_64& rng) { return random_matrix(n, 1, rng).col(0); }

void check_dense_size(int n) {
  if (n > kDenseLimit) fail(ErrorCode::InvalidInstance, "instance too large for dense oracles");
}

ProblemData unit_data(double sigma_t, double sigma_a) {
  ProblemData pd;
  pd.sigma_t = Coefficient::constant(sigma_t);
  pd.sigma_a = Coefficient::constant(sigma_a);
  return pd;
}

}  // namespace

void write_reports_csv(const std::vector<OracleReport>& reports, std::ostream& out) {
  out << "index,name,instance,measured,bound,bound_hi,pass,note\n";
  char buf[128];
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    out << i + 1 << ',' << r.name << ",\"" << r.instance << "\",";
    std::snprintf(buf, sizeof buf, "%.16e,%.16e,%.16e", r.measured, r.bound, r.bound_hi);
    out << buf << ',' << (r.pass ? 1 : 0) << ",\"" << r.note << "\"\n";
  }
}

void write_reports_text(const std::vector<OracleReport>& reports, std::ostream& out) {
  char buf[512];
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    if (r.bound_hi > 0.0)
      std::snprintf(buf, sizeof buf, "%2zu %-4s %-34s measured %.4g in [%.4g, %.4g]  %s; %s\n", i + 1,
                    r.pass ? "PASS" : "FAIL", r.name.c_str(), r.measured, r.bound, r.bound_hi, r.instance.c_str(),
                    r.note.c_str());
    else
      std::snprintf(buf, sizeof buf, "%2zu %-4s %-34s measured %.4g <= %.4g  %s%s%s\n", i + 1,
                    r.pass ? "PASS" : "FAIL", r.name.c_str(), r.measured, r.bound, r.instance.c_str(),
                    r.note.empty() ? "" : "; ", r.note.c_str());
    out << buf;
  }
}

// ---- dense operators -------------------------------------------------------

Mat dense(const SpMat& a) { return Mat(a); }

Mat dense_sweep_inverse(const TransportSystem& sys, int d) {
  const int n = sys.n_dofs();
  check_dense_size(n);
  const Mat a = Mat::Identity(n, n) + sys.eps() * dense(build_H(sys, d));
  return a.partialPivLu().inverse();
}

Mat dense_S(const TransportSystem& sys) {
  const int n = sys.n_dofs();
  const double e2 = sys.eps() * sys.eps();
  const Mat scat = (Mat::Identity(n, n) - e2 * dense(sys.mt_inverse() * sys.Ma)) / sys.normalization();
  Mat s = Mat::Zero(n, n);
  for (int d = 0; d < sys.n_angles(); ++d) s += sys.dirs().w[d] * dense_sweep_inverse(sys, d) * scat;
  return s;
}

Mat broadcast(const TransportSystem& sys) {
  const int n = sys.n_dofs(), nd = sys.n_angles();
  Mat b = Mat::Zero(n * nd, n);
  for (int d = 0; d < nd; ++d) b.block(d * n, 0, n, n) = Mat::Identity(n, n) / sys.normalization();
  return b;
}

Mat angular_sum(const TransportSystem& sys) {
  const int n = sys.n_dofs(), nd = sys.n_angles();
  Mat s = Mat::Zero(n, n * nd);
  for (int d = 0; d < nd; ++d) s.block(0, d * n, n, n) = sys.dirs().w[d] * Mat::Identity(n, n);
  return s;
}

Mat dense_P0(const TransportSystem& sys) {
  check_dense_size(sys.n_dofs() * sys.n_angles());
  return broadcast(sys) * angular_sum(sys);
}

Mat dense_W(const TransportSystem& sys) {
  const int n = sys.n_dofs(), nd = sys.n_angles();
  Vec w(n * nd);
  for (int d = 0; d < nd; ++d) w.segment(d * n, n).setConstant(sys.dirs().w[d]);
  return w.asDiagonal();
}

Mat block_diag(const std::vector<Mat>& blocks) {
  Eigen::Index n = 0;
  for (const Mat& b : blocks) n += b.rows();
  Mat out = Mat::Zero(n, n);
  Eigen::Index off = 0;
  for (const Mat& b : blocks) {
    out.block(off, off, b.rows(), b.cols()) = b;
    off += b.rows();
  }
  return out;
}

Mat dense_T(const TransportSystem& sys) {
  const int n = sys.n_dofs();
  const double e2 = sys.eps() * sys.eps();
  const Mat scat = Mat::Identity(n, n) - e2 * dense(sys.mt_inverse() * sys.Ma);
  std::vector<Mat> blocks;
  for (int d = 0; d < sys.n_angles(); ++d) blocks.push_back(dense_sweep_inverse(sys, d) * scat);
  return block_diag(blocks) * dense_P0(sys);
}

Mat dense_T_tilde(const SplitSystem& split, int k) {
  const TransportSystem& sys = *split.sys;
  const int n = sys.n_dofs();
  const double eps = sys.eps();
  std::vector<Mat> xs;
  for (int d = 0; d < sys.n_angles(); ++d) {
    const Mat ale = Mat::Identity(n, n) + eps * dense(split.H_le[d]);
    xs.push_back(-eps * ale.partialPivLu().solve(dense(split.H_gt[d])));
  }
  const Mat X = block_diag(xs);
  Mat Xk = Mat::Identity(X.rows(), X.cols());
  for (int l = 0; l < k; ++l) Xk = X * Xk;
  const Mat T = dense_T(sys);
  return T + Xk * (Mat::Identity(T.rows(), T.cols()) - T);
}

Mat dense_E_eps(const AdditiveOperator& op, int n) {
  Mat e(n, n);
  for (int j = 0; j < n; ++j) e.col(j) = op.apply(Vec::Unit(n, j));
  return e;
}

// ---- singular perturbation -------------------------------------------------

double singular_perturbation_error(const Mat& F0, const Mat& D, const Mat& P, const Mat& Q, double eps) {
  const Eigen::Index n = F0.rows();
  if (F0.cols() != n || D.rows() != n || D.cols() != n || P.rows() != n || Q.rows() != n ||
      P.cols() + Q.cols() != n)
    fail(ErrorCode::InvalidInstance, "singular perturbation: inconsistent sizes");
  if (max_abs(Mat(F0 * P)) > 1e-10 * std::max(1.0, max_abs(F0)))
    fail(ErrorCode::InvalidInstance, "singular perturbation: P is not in the null space of F0");
  Eigen::FullPivLU<Mat> lu_p(P.transpose() * D * P), lu_q(Q.transpose() * F0 * Q);
  if (!lu_p.isInvertible() || !lu_q.isInvertible())
    fail(ErrorCode::InvalidInstance, "singular perturbation: rank-deficient P^T D P or Q^T F0 Q");
  const Mat EP = P * lu_p.solve(P.transpose());
  const Mat EQ = Q * lu_q.solve(Q.transpose());
  const Mat I = Mat::Identity(n, n);
  const Mat trunc = EP / eps + (I - EP * D) * EQ * (I - D * EP);
  const Mat inv = (F0 + eps * D).fullPivLu().inverse();
  return norm2(Mat(inv - trunc));
}

OracleReport check_singular_perturbation(const Mat& F0, const Mat& D, const Mat& P, const Mat& Q,
                                         const std::vector<double>& eps_list) {
  std::vector<double> errs;
  for (double eps : eps_list) errs.push_back(singular_perturbation_error(F0, D, P, Q, eps));
  return band_report("singular_perturbation_expansion",
                     "n=" + std::to_string(F0.rows()) + " null=" + std::to_string(P.cols()),
                     decade_ratios(errs), 3.0, 30.0);
}

PerturbationInstance random_perturbation_instance(int n, int k, std::uint64_t seed) {
  if (k < 1 || k >= n) fail(ErrorCode::InvalidInstance, "null space dimension must be in [1, n)");
  std::mt19937_64 rng(seed);
  const Mat basis = random_matrix(n, n, rng).householderQr().householderQ();
  PerturbationInstance in;
  in.P = basis.leftCols(k);
  in.Q = basis.rightCols(n - k);
  const Mat B = random_matrix(n - k, n - k, rng);
  const Mat C = B * B.transpose() + Mat::Identity(n - k, n - k);
  in.F0 = in.Q * C * in.Q.transpose();
  in.F0 = 0.5 * (in.F0 + in.F0.transpose());
  in.D = random_matrix(n, n, rng) + std::sqrt(static_cast<double>(n)) * Mat::Identity(n, n);
  in.D1 = in.Q * random_matrix(n - k, n - k, rng) * in.Q.transpose();
  return in;
}

// ---- Neumann expansion -----------------------------------------------------

std::vector<NeumannSample> neumann_remainder(const ProblemData& data, const DGSpace& space,
                                             const DirectionSet& dirs, const std::vector<double>& eps_list,
                                             std::uint64_t seed) {
  std::vector<NeumannSample> out;
  std::mt19937_64 rng(seed);
  const int n = space.n_dofs(), nd = dirs.size();
  const Vec psi = random_vector(n * nd, rng);
  for (double eps : eps_list) {
    const TransportSystem sys(space, dirs, eps, data);
    const Mat K = dense(sys.mt_inverse() * sys.Ma);
    std::vector<Mat> H;
    double c0 = norm2(K), hmax = 0.0;
    for (int d = 0; d < nd; ++d) {
      H.push_back(dense(build_H(sys, d)));
      hmax = std::max(hmax, norm2(H.back()));
    }
    c0 = std::max(c0, hmax);
    NeumannSample s;
    s.eps = eps;
    s.hypothesis = eps * hmax < 1.0;
    const Vec t = psi - dense_T(sys) * psi;
    Vec phi = Vec::Zero(n);
    for (int d = 0; d < nd; ++d) phi += dirs.w[d] * psi.segment(d * n, n);
    const double inv = 1.0 / dirs.normalization;
    for (int d = 0; d < nd; ++d) {
      const Vec expansion = psi.segment(d * n, n) - inv * phi + (eps * inv) * (H[d] * phi) -
                            (eps * eps * inv) * ((H[d] * H[d] - K) * phi);
      s.remainder = std::max(s.remainder, (t.segment(d * n, n) - expansion).norm());
    }
    s.bound = std::pow(eps, 3) * inv *
              (std::pow(c0, 3) / (1.0 - eps * c0) * (1.0 + eps * eps * c0) + (c0 * c0 + eps * std::pow(c0, 3))) *
              phi.norm();
    out.push_back(s);
  }
  return out;
}

OracleReport check_neumann_remainder(const ProblemData& data, const DGSpace& space, const DirectionSet& dirs,
                                     const std::vector<double>& eps_list, std::uint64_t seed) {
  const auto samples = neumann_remainder(data, space, dirs, eps_list, seed);
  double worst = 0.0;
  std::string note;
  bool any = false;
  for (const auto& s : samples) {
    if (!s.hypothesis) {
      note += "eps=" + fmt("%.3g", s.eps) + " skipped (eps|H| >= 1); ";
      continue;
    }
    any = true;
    worst = std::max(worst, s.remainder / s.bound);
  }
  OracleReport rep = upper_report("neumann_remainder_bound", "n_dofs=" + std::to_string(space.n_dofs()), worst,
                                  1.0, note + "measured = max remainder/bound");
  rep.pass = any && worst <= 1.0;
  return rep;
}

// ---- conditioning ----------------------------------------------------------

double weighted_condition(const TransportSystem& sys) {
  const Mat T = dense_T(sys);
  const Mat W = dense_W(sys);
  const Vec sw = W.diagonal().cwiseSqrt();
  const Mat A = sw.asDiagonal() * (Mat::Identity(T.rows(), T.cols()) - T) * sw.cwiseInverse().asDiagonal();
  return cond2(A);
}

OracleReport check_condition_scaling(const ProblemData& data, const DGSpace& space, const DirectionSet& dirs,
                                     const std::vector<double>& eps_list) {
  std::vector<double> conds;
  for (double eps : eps_list) conds.push_back(weighted_condition(TransportSystem(space, dirs, eps, data)));
  std::vector<double> ratios;
  for (std::size_t i = 1; i < conds.size(); ++i) ratios.push_back(conds[i] / conds[i - 1]);
  return band_report("transport_condition_growth",
                     std::to_string(space.n_elements()) + " el, r=" + std::to_string(space.degree()) + ", S" +
                         std::to_string(dirs.size()),
                     ratios, 30.0, 300.0);
}

double sip_preconditioned_error(const TransportSystem& sys) {
  const int n = sys.n_dofs();
  const double e2 = sys.eps() * sys.eps();
  const Mat D = dense(assemble_D_eps(sys));
  const Mat A = (e2 * D).partialPivLu().solve(dense(sys.Mt) * (Mat::Identity(n, n) - dense_S(sys)));
  return norm2(Mat(A - Mat::Identity(n, n)));
}

double additive_preconditioned_error(const TransportSystem& sys) {
  const int n = sys.n_dofs();
  const AdditiveOperator op(sys, assemble_D0(sys), build_cg_embedding(sys.space()));
  const Mat A = dense_E_eps(op, n) * dense(sys.Mt) * (Mat::Identity(n, n) - dense_S(sys)) / sys.eps();
  return norm2(Mat(A - Mat::Identity(n, n)));
}

double lagged_operator_gap(const TransportSystem& sys, const SweepOrdering& ord, int k) {
  const SplitSystem split = split_H(sys, ord);
  return norm2(Mat(dense_T_tilde(split, k) - dense_T(sys)));
}

double lagged_preconditioned_gap(const TransportSystem& sys, const SweepOrdering& ord, int k) {
  const SplitSystem split = split_H(sys, ord);
  const Mat gap = dense_T(sys) - dense_T_tilde(split, k);
  const AdditiveOperator op(sys, assemble_D0(sys), build_cg_embedding(sys.space()));
  const Mat E = dense_E_eps(op, sys.n_dofs());
  const Mat A = E * dense(sys.Mt) * angular_sum(sys) * gap * broadcast(sys) / sys.eps();
  return norm2(A);
}

int longest_upper_chain(const SweepOrdering& ord) {
  int best = 0;
  for (int d = 0; d < ord.n_directions(); ++d) {
    int run = 0;
    for (bool up : ord.upper_faces(d)) {
      run = up ? run + 1 : 0;
      best = std::max(best, run);
    }
  }
  return best;
}

SweepOrdering chained_adversarial_ordering(const Mesh& mesh, const DirectionSet& dirs, double fraction,
                                           std::uint64_t seed, int k) {
  for (std::uint64_t s = seed; s < seed + 1000; ++s) {
    SweepOrdering ord = adversarial_ordering(mesh, dirs, fraction, s);
    if (longest_upper_chain(ord) >= k) return ord;
  }
  fail(ErrorCode::InvalidInstance, "no adversarial ordering with the requested chain of lagged couplings");
}

// ---- identity checks -------------------------------------------------------

OracleReport check_quadrature_and_nullspace_identities(const TransportSystem& sys) {
  const DirectionSet& q = sys.dirs();
  double worst = 0.0;
  std::string where;
  auto track = [&](double v, const char* what) {
    if (v > worst || !std::isfinite(v)) {
      worst = v;
      where = what;
    }
  };
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, sa = 0.0;
  for (int d = 0; d < q.size(); ++d) {
    s0 += q.w[d];
    s1 += q.w[d] * q.mu[d];
    s2 += q.w[d] * q.mu[d] * q.mu[d];
    sa += q.w[d] * q.mu[d] * std::abs(q.mu[d]);
  }
  track(std::abs(s0 - q.normalization) / q.normalization, "sum w");
  track(std::abs(s1), "sum w mu");
  track(std::abs(s2 - q.normalization / 3.0) / q.normalization, "sum w mu^2");
  track(std::abs(sa), "sum w mu |mu|");

  const CgEmbedding emb = build_cg_embedding(sys.space());
  for (int d = 0; d < sys.n_angles(); ++d) {
    const double mu = q.mu[d];
    const SpMat lhs = mu * sys.G + sys.F[d];
    const SpMat rhs = -mu * SpMat(sys.G.transpose()) + sys.Ft[d];
    track(max_abs(SpMat(lhs - rhs)) / max_abs(lhs), "integration by parts");
    track(max_abs(SpMat(sys.F[d] * emb.P)) / max_abs(sys.F[d]), "F P = 0");
    track(max_abs(SpMat(SpMat(emb.P.transpose()) * sys.Ft[d])) / max_abs(sys.Ft[d]), "P^T F~ = 0");
  }

  const Mat P0 = dense_P0(sys);
  track(max_abs(Mat(P0 * P0 - P0)), "P0 idempotent");
  std::mt19937_64 rng(7);
  const Mat W = dense_W(sys);
  const Mat I = Mat::Identity(P0.rows(), P0.cols());
  for (int t = 0; t < 5; ++t) {
    const Vec x = random_vector(static_cast<int>(P0.rows()), rng), y = random_vector(static_cast<int>(P0.rows()), rng);
    const Vec px = P0 * x, qy = (I - P0) * y;
    track(std::abs(px.dot(W * qy)) / (std::sqrt(px.dot(W * px)) * std::sqrt(y.dot(W * y))), "P0 W-orthogonal");
  }
  return upper_report("identity_suite",
                      std::to_string(sys.space().n_elements()) + " el, r=" + std::to_string(sys.space().degree()) +
                          ", S" + std::to_string(sys.n_angles()),
                      worst, 1e-12, "worst: " + where);
}

// ---- suite -----------------------------------------------------------------

std::vector<OracleReport> run_oracle_suite(std::uint64_t seed) {
  std::vector<OracleReport> out;
  const DirectionSet s2 = gauss_legendre_set(2), s4 = gauss_legendre_set(4);
  const ProblemData pd = unit_data(1.0, 1.0);

  // Identities on a 10-element, r=2, S4 instance.
  const DGSpace sp10(uniform_mesh(0.0, 1.0, 10), 2);
  const TransportSystem sys10(sp10, s4, 0.1, unit_data(1.0, 0.5));
  out.push_back(check_quadrature_and_nullspace_identities(sys10));

  // Face moment forms against trace-by-trace evaluation.
  {
    std::mt19937_64 rng(seed);
    const Vec u = random_vector(sp10.n_dofs(), rng), v = random_vector(sp10.n_dofs(), rng);
    const double alpha = face_alpha(s4);
    double f0 = 0.0, f1 = 0.0, ft1 = 0.0;
    for (const Face& f : faces(sp10)) {
      double ju = 0.0, jv = 0.0, au = 0.0, av = 0.0;
      for (const auto& s : f.sides) {
        const double xi = (f.boundary ? (f.normal < 0 ? -1.0 : 1.0) : (s.jump_weight > 0 ? 1.0 : -1.0));
        const double uu = sp10.evaluate(u, s.element, xi), vv = sp10.evaluate(v, s.element, xi);
        ju += s.jump_weight * uu;
        jv += s.jump_weight * vv;
        au += s.avg_weight * uu;
        av += s.avg_weight * vv;
      }
      f0 += 0.5 * alpha * ju * jv;
      f1 += -(1.0 / 3.0) * f.normal * ju * av;
      ft1 += (1.0 / 3.0) * f.normal * au * jv;
    }
    const double e0 = std::abs(v.dot(sys10.moments.F0 * u) - f0) / std::abs(f0);
    const double e1 = std::abs(v.dot(sys10.moments.F1 * u) - f1) / std::abs(f1);
    const double e2 = std::abs(v.dot(sys10.moments.Ft1 * u) - ft1) / std::abs(ft1);
    out.push_back(upper_report("face_moment_forms", "10 el, r=2, S4", std::max({e0, e1, e2}), 1e-12,
                               "F0/F1/F~1 vs trace sums"));
  }

  // M_t^-1 G u = u'/sigma_t at the nodes, constant sigma_t.
  {
    const TransportSystem sys(sp10, s4, 0.1, unit_data(2.5, 0.0));
    std::mt19937_64 rng(seed + 1);
    const Vec u = random_vector(sp10.n_dofs(), rng);
    const Vec lhs = sys.mt_solve(sys.G * u);
    Vec rhs(sp10.n_dofs());
    for (int e = 0; e < sp10.n_elements(); ++e)
      for (int i = 0; i < sp10.n_local(); ++i)
        rhs(sp10.dof(e, i)) = sp10.basis_deriv(sp10.ref_nodes()[i]).dot(u.segment(sp10.dof(e, 0), sp10.n_local())) /
                              sp10.jacobian(e) / 2.5;
    out.push_back(upper_report("derivative_identity", "10 el, r=2, sigma_t=2.5",
                               (lhs - rhs).lpNorm<Eigen::Infinity>() / rhs.lpNorm<Eigen::Infinity>(), 1e-11));
  }

  // D_eps against the directly assembled SIP form.
  {
    double worst = 0.0;
    for (int r : {1, 2, 3})
      for (double eps : {1e-1, 1e-3}) {
        const TransportSystem sys(DGSpace(uniform_mesh(0.0, 1.0, 6), r), s4, eps, unit_data(1.7, 0.3));
        const SpMat d = assemble_D_eps(sys);
        worst = std::max(worst, max_abs(SpMat(d - assemble_sip_direct(sys))) / max_abs(d));
      }
    out.push_back(upper_report("sip_bilinear_equivalence", "6 el, r=1..3, eps=1e-1,1e-3", worst, 1e-11));
  }

  // P^T D1 = D1 P = 0.
  {
    const SpMat d1 = assemble_D1(sys10);
    const CgEmbedding emb = build_cg_embedding(sp10);
    const double m = std::max(max_abs(SpMat(SpMat(emb.P.transpose()) * d1)), max_abs(SpMat(d1 * emb.P)));
    out.push_back(upper_report("d1_annihilation", "10 el, r=2, S4", m / max_abs(d1), 1e-12));
  }

  // Neumann expansion remainder: bound and cubic scaling.
  {
    const DGSpace sp(uniform_mesh(0.0, 10.0, 4), 1);
    const ProblemData nd = unit_data(1.0, 0.5);
    const std::vector<double> eps_list{1e-1, 3e-2, 1e-2};
    out.push_back(check_neumann_remainder(nd, sp, s2, eps_list, seed));
    const auto samples = neumann_remainder(nd, sp, s2, eps_list, seed);
    double lo = INFINITY, hi = 0.0;
    for (const auto& s : samples) {
      const double c = s.remainder / std::pow(s.eps, 3);
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
    out.push_back(upper_report("neumann_remainder_cubic", "4 el on [0,10], r=1, S2", hi / lo, 10.0,
                               "spread of remainder/eps^3"));
  }

  // Singular perturbation expansion on seeded random instances.
  {
    const std::vector<double> eps_list{1e-2, 1e-3, 1e-4};
    OracleReport agg;
    agg.name = "singular_perturbation_expansion";
    agg.instance = "10 random 30x30, null dim 10";
    agg.bound = 3.0;
    agg.bound_hi = 30.0;
    agg.pass = true;
    std::vector<double> all;
    for (int i = 0; i < 10; ++i) {
      const auto in = random_perturbation_instance(30, 10, seed + 100 + i);
      const auto rep = check_singular_perturbation(in.F0, in.D, in.P, in.Q, eps_list);
      agg.pass = agg.pass && rep.pass;
      std::vector<double> errs;
      for (double e : eps_list) errs.push_back(singular_perturbation_error(in.F0, in.D, in.P, in.Q, e));
      for (double r : decade_ratios(errs)) all.push_back(r);
    }
    agg.measured = *std::min_element(all.begin(), all.end());
    agg.note = "min ratio; max " + fmt("%.4g", *std::max_element(all.begin(), all.end()));
    out.push_back(agg);

    std::vector<double> errs;
    const auto in = random_perturbation_instance(30, 10, seed + 200);
    for (double e : eps_list) {
      const Mat a = (in.F0 + e * (in.D + in.D1)).fullPivLu().inverse();
      const Mat b = (in.F0 + e * in.D).fullPivLu().inverse();
      errs.push_back(norm2(Mat(a - b)));
    }
    out.push_back(band_report("singular_perturbation_d1", "30x30, null dim 10", decade_ratios(errs), 3.0, 30.0));
  }

  // Lagged-sweep identity on random dense instances.
  {
    double worst = 0.0;
    std::mt19937_64 rng(seed + 300);
    for (int t = 0; t < 5; ++t) {
      const Mat hle = random_matrix(20, 20, rng).triangularView<Eigen::Lower>();
      const Mat hgt = random_matrix(20, 20, rng).triangularView<Eigen::StrictlyUpper>();
      const Mat b = random_matrix(20, 20, rng);
      worst = std::max(worst, verify_lagged_identity(hle, hgt, b, 0.1, 3).discrepancy);
    }
    out.push_back(upper_report("lagged_sweep_identity", "5 random 20x20, eps=0.1, k=3", worst, 1e-10));
  }

  // Conditioning of I - T_eps and of the preconditioned system.
  const DGSpace sp8(uniform_mesh(0.0, 1.0, 8), 1);
  out.push_back(check_condition_scaling(pd, sp8, s2, {1e-1, 1e-2}));
  {
    const TransportSystem sys(sp8, s2, 1e-3, pd);
    const int n = sys.n_dofs();
    const Mat A = (sys.eps() * sys.eps() * dense(assemble_D_eps(sys)))
                      .partialPivLu()
                      .solve(dense(sys.Mt) * (Mat::Identity(n, n) - dense_S(sys)));
    out.push_back(upper_report("preconditioned_condition", "8 el, r=1, S2, eps=1e-3", cond2(A), 3.0));
  }

  // First-order rates of the two DSA preconditioners.
  {
    std::vector<double> es, ea;
    for (double eps : {1e-2, 1e-3}) {
      const TransportSystem sys(sp8, s2, eps, pd);
      es.push_back(sip_preconditioned_error(sys));
      ea.push_back(additive_preconditioned_error(sys));
    }
    out.push_back(band_report("sip_dsa_rate", "8 el, r=1, S2, eps 1e-2 -> 1e-3", decade_ratios(es), 5.0, 20.0));
    out.push_back(band_report("additive_dsa_rate", "8 el, r=1, S2, eps 1e-2 -> 1e-3", decade_ratios(ea), 5.0, 20.0));
  }

  // Conditioning inside the additive preconditioner versus D_eps.
  {
    std::vector<double> cp, cq, cd;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
      const TransportSystem sys(sp8, s2, eps, pd);
      const AdditiveOperator op(sys, assemble_D0(sys), build_cg_embedding(sp8));
      cp.push_back(cond2(dense(op.cg_matrix())));
      cq.push_back(cond2(dense(op.jump_matrix())));
      cd.push_back(cond2(dense(assemble_D_eps(sys))));
    }
    auto spread = [](const std::vector<double>& v) {
      return *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end());
    };
    out.push_back(upper_report("additive_subsystem_conditioning", "8 el, r=1, S2, eps 1e-2..1e-4",
                               std::max(spread(cp), spread(cq)), 2.0, "max/min condition spread"));
    std::vector<double> growth;
    for (std::size_t i = 1; i < cd.size(); ++i) growth.push_back(cd[i] / cd[i - 1]);
    out.push_back(band_report("d_eps_condition_growth", "8 el, r=1, S2, eps 1e-2..1e-4", growth, 3.0, 30.0));
  }

  // Lagged sweeps: operator gap and preconditioned gap.
  {
    const DGSpace sp(uniform_mesh(0.0, 1.0, 8), 1);
    const SweepOrdering ord = chained_adversarial_ordering(sp.mesh(), s2, 0.5, seed, 3);
    std::vector<double> gaps, pgaps;
    for (double eps : {1e-2, 1e-3}) {
      const TransportSystem sys(sp, s2, eps, pd);
      gaps.push_back(lagged_operator_gap(sys, ord, 3));
      pgaps.push_back(lagged_preconditioned_gap(sys, ord, 3));
    }
    out.push_back(band_report("lagged_operator_gap", "8 el, r=1, S2, adversarial 0.5, k=3", decade_ratios(gaps),
                              300.0, 3000.0));
    OracleReport rep = band_report("lagged_preconditioned_gap", "8 el, r=1, S2, adversarial 0.5, k=3",
                                   decade_ratios(pgaps), 3.0, std::numeric_limits<double>::infinity());
    rep.note += " (at least first-order decay)";
    out.push_back(rep);
  }
  return out;
}

}  // namespace slabdsa
