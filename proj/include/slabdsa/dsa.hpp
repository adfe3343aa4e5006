#pragma once

#include <memory>
#include <string>

#include "slabdsa/linalg.hpp"
#include "slabdsa/transport.hpp"

namespace slabdsa {

// D0 = (1/3) G^T M_t^-1 G - F~1 M_t^-1 G + G^T M_t^-1 F1 + M_a.
SpMat assemble_D0(const TransportSystem& sys);
// D1 = -(1/Sigma) sum_d w_d F~^(d) M_t^-1 F^(d).
SpMat assemble_D1(const TransportSystem& sys);
// D_eps = F0/eps + D0.
SpMat assemble_D_eps(const TransportSystem& sys);
// D_IP = F0/eps + (1/3) G^T M_t^-1 G - F~1 M_t^-1 G + M_a (nonsymmetric).
SpMat assemble_ip(const TransportSystem& sys);

// Symmetric interior penalty form with diffusion coefficient 1/(3 sigma_t):
//   sum_f kappa_f [[u]][[v]] + int u'v'/(3 sigma_t) - sum_f n {u'/(3 sigma_t)}[[v]]
//   - sum_f n {v'/(3 sigma_t)}[[u]] + int sigma_a u v,
// with boundary averages taken as half the trace. kappa_f = (alpha/2)/eps
// reproduces D_eps for constant sigma_t.
SpMat assemble_sip_direct(const TransportSystem& sys);
// Same form with kappa_f = max(1/(4 eps), C_p / (sigma_t h)) using the
// smallest sigma_t h next to the face.
SpMat assemble_mip(const TransportSystem& sys, double c_p);
double mip_penalty_coefficient(double eps, double sigma_t, double h, double c_p);

struct DsaOperators {
  SpMat D0, D1, D_eps, D_ip, B_sip;
};
DsaOperators assemble_dsa_operators(const TransportSystem& sys);

// Continuous piecewise-degree-r functions vanishing at both ends, and a basis
// for a complement: one jump vector per interior vertex (+1 on the left trace,
// -1 on the right trace) plus the two boundary trace dofs.
struct CgEmbedding {
  SpMat P;  // n_dofs x n_cg
  SpMat R;  // n_cg x n_dofs: averages shared vertex dofs, drops boundary dofs
  SpMat Q;  // n_dofs x (n_elements + 1)
  int n_cg = 0;

  Vec project(const Vec& u) const { return P * (R * u); }
};
CgEmbedding build_cg_embedding(const DGSpace& space);

// E_eps = E_P/eps + (I - E_P D0) E_Q (I - D0 E_P) with
// E_P = P (P^T D0 P)^-1 P^T and E_Q = Q (Q^T F0 Q)^-1 Q^T.
class AdditiveOperator {
 public:
  AdditiveOperator(const TransportSystem& sys, const SpMat& D0, const CgEmbedding& emb);

  Vec apply_E_P(const Vec& b) const;
  Vec apply_E_Q(const Vec& b) const;
  Vec apply(const Vec& b) const;

  const SpMat& cg_matrix() const { return ptdp_; }
  const SpMat& jump_matrix() const { return qtfq_; }

 private:
  double eps_;
  SpMat D0_;
  CgEmbedding emb_;
  SpMat ptdp_, qtfq_;
  Eigen::SparseLU<SpMat> lu_p_, lu_q_;
};

Vec apply_additive_Eeps(const AdditiveOperator& op, const Vec& rhs);

enum class PrecondKind { None, SIP, IP, MIP, Additive };
std::string to_string(PrecondKind k);
PrecondKind parse_precond(const std::string& s);

// Practical DSA correction: delta = (eps^2 D)^-1 M_t diff for SIP, IP and MIP;
// delta = (1/eps) E_eps M_t diff for the additive operator; zero for None.
class Preconditioner : public FluxCorrection {
 public:
  Preconditioner(const TransportSystem& sys, PrecondKind kind, double mip_cp = 4.0);

  PrecondKind kind() const { return kind_; }
  Vec correction(const Vec& diff) const override;
  // Operator inverted by SIP / IP / MIP; empty otherwise.
  const SpMat& matrix() const { return D_; }

 private:
  const TransportSystem* sys_;
  PrecondKind kind_;
  SpMat D_;
  Eigen::SparseLU<SpMat> lu_;
  std::unique_ptr<AdditiveOperator> additive_;
};

}  // namespace slabdsa
