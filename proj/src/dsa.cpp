#include "slabdsa/dsa.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "slabdsa/errors.hpp"

namespace slabdsa {

namespace {

SpMat compressed(SpMat a) {
  a.makeCompressed();
  return a;
}

}  // namespace

SpMat assemble_D0(const TransportSystem& sys) {
  const SpMat minv = sys.mt_inverse();
  const SpMat mg = minv * sys.G;
  const SpMat gt = sys.G.transpose();
  return compressed((1.0 / 3.0) * SpMat(gt * mg) - SpMat(sys.moments.Ft1 * mg) +
                    SpMat(gt * SpMat(minv * sys.moments.F1)) + sys.Ma);
}

SpMat assemble_D1(const TransportSystem& sys) {
  const SpMat minv = sys.mt_inverse();
  SpMat d1(sys.n_dofs(), sys.n_dofs());
  for (int d = 0; d < sys.n_angles(); ++d)
    d1 -= (sys.dirs().w[d] / sys.normalization()) * SpMat(sys.Ft[d] * SpMat(minv * sys.F[d]));
  return compressed(d1);
}

SpMat assemble_D_eps(const TransportSystem& sys) {
  return compressed(sys.moments.F0 / sys.eps() + assemble_D0(sys));
}

SpMat assemble_ip(const TransportSystem& sys) {
  const SpMat minv = sys.mt_inverse();
  const SpMat mg = minv * sys.G;
  return compressed(sys.moments.F0 / sys.eps() + (1.0 / 3.0) * SpMat(sys.G.transpose() * mg) -
                    SpMat(sys.moments.Ft1 * mg) + sys.Ma);
}

double mip_penalty_coefficient(double eps, double sigma_t, double h, double c_p) {
  if (!(eps > 0.0 && sigma_t > 0.0 && h > 0.0 && c_p > 0.0))
    fail(ErrorCode::InvalidArgument, "MIP penalty inputs must be positive");
  return std::max(1.0 / (4.0 * eps), c_p / (sigma_t * h));
}

namespace {

// Reconstructs element-mean sigma_t / sigma_a from the assembled mass matrices.
std::vector<double> element_mean_from_mass(const TransportSystem& sys, const SpMat& m) {
  const DGSpace& s = sys.space();
  const int nl = s.n_local();
  std::vector<double> out(s.n_elements());
  const Vec ones = Vec::Ones(s.n_dofs());
  const Vec row = m * ones;
  for (int e = 0; e < s.n_elements(); ++e) out[e] = row.segment(e * nl, nl).sum() / s.mesh().h(e);
  return out;
}

SpMat sip_form(const TransportSystem& sys, const std::vector<double>& kappa) {
  const DGSpace& space = sys.space();
  const std::vector<double> sig = element_mean_from_mass(sys, sys.Mt);
  std::vector<double> k(sig.size());
  for (std::size_t e = 0; e < sig.size(); ++e) k[e] = 1.0 / (3.0 * sig[e]);

  // Volume diffusion with the piecewise-constant coefficient used on faces.
  const int nl = space.n_local();
  const SpMat unit = assemble_stiffness(space, Coefficient::constant(1.0));
  Triplets t;
  for (int c = 0; c < unit.outerSize(); ++c)
    for (SpMat::InnerIterator it(unit, c); it; ++it)
      t.emplace_back(it.row(), it.col(), k[it.row() / nl] * it.value());

  const std::vector<Face> fs = faces(space);
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const Face& f = fs[i];
    const LinComb jump = face_jump(space, f);
    const LinComb davg = face_avg_deriv(space, f, k);
    add_outer(t, jump, jump, kappa[i]);
    add_outer(t, jump, davg, -f.normal);
    add_outer(t, davg, jump, -f.normal);
  }
  SpMat a(space.n_dofs(), space.n_dofs());
  a.setFromTriplets(t.begin(), t.end());
  return compressed(a + sys.Ma);
}

}  // namespace

SpMat assemble_sip_direct(const TransportSystem& sys) {
  const double kappa = 0.5 * face_alpha(sys.dirs()) / sys.eps();
  return sip_form(sys, std::vector<double>(sys.space().mesh().n_faces(), kappa));
}

SpMat assemble_mip(const TransportSystem& sys, double c_p) {
  const DGSpace& space = sys.space();
  const std::vector<double> sig = element_mean_from_mass(sys, sys.Mt);
  const std::vector<Face> fs = faces(space);
  std::vector<double> kappa(fs.size());
  for (std::size_t i = 0; i < fs.size(); ++i) {
    kappa[i] = 0.0;
    for (const auto& s : fs[i].sides)
      kappa[i] = std::max(kappa[i], mip_penalty_coefficient(sys.eps(), sig[s.element],
                                                            space.mesh().h(s.element), c_p));
  }
  return sip_form(sys, kappa);
}

DsaOperators assemble_dsa_operators(const TransportSystem& sys) {
  DsaOperators ops;
  ops.D0 = assemble_D0(sys);
  ops.D1 = assemble_D1(sys);
  ops.D_eps = compressed(sys.moments.F0 / sys.eps() + ops.D0);
  ops.D_ip = assemble_ip(sys);
  ops.B_sip = assemble_sip_direct(sys);
  return ops;
}

CgEmbedding build_cg_embedding(const DGSpace& space) {
  const int r = space.degree(), ne = space.n_elements();
  if (r < 1) fail(ErrorCode::UnsupportedDegree, "continuous embedding needs degree >= 1");
  Triplets p, rr, q;
  int col = 0;
  for (int e = 0; e < ne; ++e) {
    if (e > 0) {
      // Vertex shared by e-1 and e.
      p.emplace_back(space.dof(e - 1, r), col, 1.0);
      p.emplace_back(space.dof(e, 0), col, 1.0);
      rr.emplace_back(col, space.dof(e - 1, r), 0.5);
      rr.emplace_back(col, space.dof(e, 0), 0.5);
      ++col;
    }
    for (int i = 1; i < r; ++i) {
      p.emplace_back(space.dof(e, i), col, 1.0);
      rr.emplace_back(col, space.dof(e, i), 1.0);
      ++col;
    }
  }
  int qc = 0;
  q.emplace_back(space.dof(0, 0), qc++, 1.0);
  for (int e = 1; e < ne; ++e) {
    q.emplace_back(space.dof(e - 1, r), qc, 1.0);
    q.emplace_back(space.dof(e, 0), qc, -1.0);
    ++qc;
  }
  q.emplace_back(space.dof(ne - 1, r), qc++, 1.0);

  CgEmbedding emb;
  emb.n_cg = col;
  emb.P.resize(space.n_dofs(), col);
  emb.P.setFromTriplets(p.begin(), p.end());
  emb.R.resize(col, space.n_dofs());
  emb.R.setFromTriplets(rr.begin(), rr.end());
  emb.Q.resize(space.n_dofs(), qc);
  emb.Q.setFromTriplets(q.begin(), q.end());
  return emb;
}

AdditiveOperator::AdditiveOperator(const TransportSystem& sys, const SpMat& D0, const CgEmbedding& emb)
    : eps_(sys.eps()), D0_(D0), emb_(emb) {
  ptdp_ = compressed(SpMat(emb_.P.transpose()) * D0_ * emb_.P);
  qtfq_ = compressed(SpMat(emb_.Q.transpose()) * sys.moments.F0 * emb_.Q);
  lu_p_.compute(ptdp_);
  if (lu_p_.info() != Eigen::Success) fail(ErrorCode::Factorization, "additive DSA: P^T D0 P is singular");
  lu_q_.compute(qtfq_);
  if (lu_q_.info() != Eigen::Success) fail(ErrorCode::Factorization, "additive DSA: Q^T F0 Q is singular");
}

Vec AdditiveOperator::apply_E_P(const Vec& b) const {
  return emb_.P * lu_p_.solve(Vec(emb_.P.transpose() * b));
}

Vec AdditiveOperator::apply_E_Q(const Vec& b) const {
  return emb_.Q * lu_q_.solve(Vec(emb_.Q.transpose() * b));
}

Vec AdditiveOperator::apply(const Vec& b) const {
  // E_P b serves both the 1/eps term and the right factor (I - D0 E_P).
  const Vec p = apply_E_P(b);
  const Vec c = apply_E_Q(b - D0_ * p);
  return p / eps_ + c - apply_E_P(D0_ * c);
}

Vec apply_additive_Eeps(const AdditiveOperator& op, const Vec& rhs) { return op.apply(rhs); }

std::string to_string(PrecondKind k) {
  switch (k) {
    case PrecondKind::None: return "none";
    case PrecondKind::SIP: return "sip";
    case PrecondKind::IP: return "ip";
    case PrecondKind::MIP: return "mip";
    case PrecondKind::Additive: return "additive";
  }
  return "none";
}

PrecondKind parse_precond(const std::string& s) {
  std::string l = s;
  std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
  if (l == "none") return PrecondKind::None;
  if (l == "sip") return PrecondKind::SIP;
  if (l == "ip" || l == "nip") return PrecondKind::IP;
  if (l == "mip") return PrecondKind::MIP;
  if (l == "additive" || l == "add") return PrecondKind::Additive;
  fail(ErrorCode::Config, "unknown preconditioner '" + s + "' (none|sip|ip|mip|additive)");
}

Preconditioner::Preconditioner(const TransportSystem& sys, PrecondKind kind, double mip_cp)
    : sys_(&sys), kind_(kind) {
  switch (kind) {
    case PrecondKind::None: return;
    case PrecondKind::SIP: D_ = assemble_D_eps(sys); break;
    case PrecondKind::IP: D_ = assemble_ip(sys); break;
    case PrecondKind::MIP: D_ = assemble_mip(sys, mip_cp); break;
    case PrecondKind::Additive:
      additive_ = std::make_unique<AdditiveOperator>(sys, assemble_D0(sys), build_cg_embedding(sys.space()));
      return;
  }
  lu_.compute(D_);
  if (lu_.info() != Eigen::Success)
    fail(ErrorCode::Factorization, "factorization of the " + to_string(kind) + " DSA matrix failed");
}

Vec Preconditioner::correction(const Vec& diff) const {
  const double eps = sys_->eps();
  switch (kind_) {
    case PrecondKind::None: return Vec::Zero(diff.size());
    case PrecondKind::Additive: return additive_->apply(sys_->mt_apply(diff)) / eps;
    default: return lu_.solve(sys_->mt_apply(diff)) / (eps * eps);
  }
}

}  // namespace slabdsa
