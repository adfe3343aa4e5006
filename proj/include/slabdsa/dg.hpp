#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "slabdsa/linalg.hpp"
#include "slabdsa/mesh.hpp"
#include "slabdsa/quadrature.hpp"

namespace slabdsa {

// Spatial coefficient. `degree` is the polynomial degree when known (0 for
// constants) and -1 otherwise; it only selects the volume quadrature order.
struct Coefficient {
  std::function<double(double)> f;
  int degree = -1;

  double operator()(double x) const { return f(x); }
  static Coefficient constant(double c) { return {[c](double) { return c; }, 0}; }
};

// Nodal Lagrange basis of degree r on Gauss-Lobatto points, element-contiguous
// numbering: element e owns dofs [e(r+1), (e+1)(r+1)).
class DGSpace {
 public:
  DGSpace(Mesh mesh, int degree);

  const Mesh& mesh() const { return mesh_; }
  int degree() const { return degree_; }
  int n_local() const { return degree_ + 1; }
  int n_elements() const { return mesh_.n_elements(); }
  int n_dofs() const { return n_local() * n_elements(); }
  int dof(int e, int i) const { return e * n_local() + i; }

  const std::vector<double>& ref_nodes() const { return ref_.nodes; }
  double node_x(int e, int i) const;
  double jacobian(int e) const { return 0.5 * mesh_.h(e); }
  double to_physical(int e, double xi) const { return mesh_.center(e) + jacobian(e) * xi; }

  // Basis values / reference derivatives at reference point xi in [-1, 1].
  Vec basis(double xi) const;
  Vec basis_deriv(double xi) const;

  // Interpolant at the nodes.
  Vec interpolate(const std::function<double(double)>& f) const;
  // Evaluates the DG function u on element e at reference point xi.
  double evaluate(const Vec& u, int e, double xi) const;

  // Number of Gauss points used for a coefficient integral.
  int quadrature_points(int coeff_degree) const;

 private:
  Mesh mesh_;
  int degree_;
  Rule ref_;
};

// One face and its adjacent element traces. Interior faces carry the normal
// +1 pointing from the left element to the right one; boundary faces use the
// outward normal. Jump weights are +1 (left) / -1 (right) inside and 1 on the
// boundary; average weights are 1/2 on every side, so the boundary average is
// half the one-sided trace, which is what makes the upwind boundary flux
// consistent with the integration-by-parts identity.
struct FaceSide {
  int element = -1;
  double jump_weight = 0.0;
  double avg_weight = 0.0;
  Vec trace;   // basis values at the face
  Vec dtrace;  // physical basis derivatives at the face
};

struct Face {
  double x = 0.0;
  double normal = 1.0;
  bool boundary = false;
  std::vector<FaceSide> sides;
};

std::vector<Face> faces(const DGSpace& space);

// Sparse linear functional sum_k c_k u_{i_k}.
using LinComb = std::vector<std::pair<int, double>>;
LinComb face_jump(const DGSpace& space, const Face& f);
LinComb face_avg(const DGSpace& space, const Face& f);
// Average of per-side weighted derivatives, {k u'} with k given per element.
LinComb face_avg_deriv(const DGSpace& space, const Face& f, const std::vector<double>& k);
// Adds c * v_row * u_col for row combination `v` and column combination `u`.
void add_outer(Triplets& t, const LinComb& v, const LinComb& u, double c);

// sum_e int sigma u v.
SpMat assemble_mass(const DGSpace& space, const Coefficient& sigma, bool require_positive = false);
// G_mn = sum_e int phi_n' phi_m.
SpMat assemble_gradient(const DGSpace& space);
// sum_e int k u' v'.
SpMat assemble_stiffness(const DGSpace& space, const Coefficient& k);
// Upwind face matrix: -mu n [[u]]{v} + 1/2 |mu| [[u]][[v]] over all faces.
SpMat assemble_face_upwind(const DGSpace& space, double mu);
// Adjoint face matrix: mu n {u}[[v]] + 1/2 |mu| [[u]][[v]] over all faces, so
// that mu G + F = -mu G^T + F~.
SpMat assemble_face_adjoint(const DGSpace& space, double mu);

struct Moments {
  SpMat F0;   // (1/Sigma) sum_d w_d F^(d)
  SpMat F1;   // (1/Sigma) sum_d w_d mu_d F^(d)
  SpMat Ft1;  // (1/Sigma) sum_d w_d mu_d F~^(d)
};
Moments assemble_moments(const DGSpace& space, const DirectionSet& dirs);

// [b]_m = sum_e int f phi_m.
Vec assemble_load(const DGSpace& space, const std::function<double(double)>& f, int degree = -1);

// Element-mean of a coefficient, using the mass quadrature.
std::vector<double> element_means(const DGSpace& space, const Coefficient& c);

}  // namespace slabdsa
