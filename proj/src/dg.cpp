#include "slabdsa/dg.hpp"

#include <cmath>
#include <string>

#include "slabdsa/errors.hpp"

namespace slabdsa {

DGSpace::DGSpace(Mesh mesh, int degree) : mesh_(std::move(mesh)), degree_(degree) {
  if (degree < 0) fail(ErrorCode::InvalidArgument, "polynomial degree must be >= 0");
  if (mesh_.n_elements() < 1) fail(ErrorCode::InvalidArgument, "empty mesh");
  ref_ = gauss_lobatto_rule(degree + 1);
}

double DGSpace::node_x(int e, int i) const { return to_physical(e, ref_.nodes[i]); }

Vec DGSpace::basis(double xi) const {
  const int n = n_local();
  Vec v = Vec::Ones(n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      if (k != j) v(j) *= (xi - ref_.nodes[k]) / (ref_.nodes[j] - ref_.nodes[k]);
  return v;
}

Vec DGSpace::basis_deriv(double xi) const {
  const int n = n_local();
  Vec v = Vec::Zero(n);
  for (int j = 0; j < n; ++j) {
    for (int m = 0; m < n; ++m) {
      if (m == j) continue;
      double term = 1.0 / (ref_.nodes[j] - ref_.nodes[m]);
      for (int k = 0; k < n; ++k)
        if (k != j && k != m) term *= (xi - ref_.nodes[k]) / (ref_.nodes[j] - ref_.nodes[k]);
      v(j) += term;
    }
  }
  return v;
}

Vec DGSpace::interpolate(const std::function<double(double)>& f) const {
  Vec u(n_dofs());
  for (int e = 0; e < n_elements(); ++e)
    for (int i = 0; i < n_local(); ++i) u(dof(e, i)) = f(node_x(e, i));
  return u;
}

double DGSpace::evaluate(const Vec& u, int e, double xi) const {
  return basis(xi).dot(u.segment(dof(e, 0), n_local()));
}

int DGSpace::quadrature_points(int coeff_degree) const {
  const int deg = coeff_degree < 0 ? 2 * degree_ + 4 : coeff_degree;
  return std::max(1, (2 * degree_ + deg + 2) / 2);
}

std::vector<Face> faces(const DGSpace& space) {
  const int ne = space.n_elements();
  const Vec left_trace = space.basis(-1.0), right_trace = space.basis(1.0);
  const Vec left_d = space.basis_deriv(-1.0), right_d = space.basis_deriv(1.0);
  std::vector<Face> out;
  out.reserve(ne + 1);
  for (int f = 0; f <= ne; ++f) {
    Face face;
    face.x = space.mesh().vertices[f];
    if (f == 0) {
      face.boundary = true;
      face.normal = -1.0;
      face.sides.push_back({0, 1.0, 0.5, left_trace, left_d / space.jacobian(0)});
    } else if (f == ne) {
      face.boundary = true;
      face.normal = 1.0;
      face.sides.push_back({ne - 1, 1.0, 0.5, right_trace, right_d / space.jacobian(ne - 1)});
    } else {
      face.normal = 1.0;
      face.sides.push_back({f - 1, 1.0, 0.5, right_trace, right_d / space.jacobian(f - 1)});
      face.sides.push_back({f, -1.0, 0.5, left_trace, left_d / space.jacobian(f)});
    }
    out.push_back(std::move(face));
  }
  return out;
}

namespace {

LinComb side_comb(const DGSpace& space, const Face& f, bool jump, bool deriv,
                  const std::vector<double>* k) {
  LinComb c;
  for (const auto& s : f.sides) {
    const double w = (jump ? s.jump_weight : s.avg_weight) * (k ? (*k)[s.element] : 1.0);
    const Vec& tr = deriv ? s.dtrace : s.trace;
    for (int i = 0; i < space.n_local(); ++i)
      if (tr(i) != 0.0) c.emplace_back(space.dof(s.element, i), w * tr(i));
  }
  return c;
}

}  // namespace

LinComb face_jump(const DGSpace& space, const Face& f) { return side_comb(space, f, true, false, nullptr); }
LinComb face_avg(const DGSpace& space, const Face& f) { return side_comb(space, f, false, false, nullptr); }
LinComb face_avg_deriv(const DGSpace& space, const Face& f, const std::vector<double>& k) {
  return side_comb(space, f, false, true, &k);
}

void add_outer(Triplets& t, const LinComb& v, const LinComb& u, double c) {
  if (c == 0.0) return;
  for (const auto& [i, vi] : v)
    for (const auto& [j, uj] : u) t.emplace_back(i, j, c * vi * uj);
}

namespace {

SpMat from_triplets(int n, const Triplets& t) {
  SpMat a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();
  return a;
}

}  // namespace

SpMat assemble_mass(const DGSpace& space, const Coefficient& sigma, bool require_positive) {
  const Rule q = gauss_legendre_rule(space.quadrature_points(sigma.degree));
  const int nl = space.n_local();
  Triplets t;
  t.reserve(static_cast<std::size_t>(space.n_elements()) * nl * nl);
  for (int e = 0; e < space.n_elements(); ++e) {
    Mat block = Mat::Zero(nl, nl);
    for (std::size_t k = 0; k < q.nodes.size(); ++k) {
      const double x = space.to_physical(e, q.nodes[k]);
      const double s = sigma(x);
      if (!std::isfinite(s) || (require_positive && !(s > 0.0)))
        fail(ErrorCode::InvalidCoefficient,
             "coefficient must be positive; got " + std::to_string(s) + " at x = " + std::to_string(x));
      const Vec phi = space.basis(q.nodes[k]);
      block += (q.weights[k] * space.jacobian(e) * s) * phi * phi.transpose();
    }
    for (int i = 0; i < nl; ++i)
      for (int j = 0; j < nl; ++j)
        if (block(i, j) != 0.0) t.emplace_back(space.dof(e, i), space.dof(e, j), block(i, j));
  }
  return from_triplets(space.n_dofs(), t);
}

SpMat assemble_gradient(const DGSpace& space) {
  const Rule q = gauss_legendre_rule(space.n_local());
  const int nl = space.n_local();
  Mat block = Mat::Zero(nl, nl);
  for (std::size_t k = 0; k < q.nodes.size(); ++k)
    block += q.weights[k] * space.basis(q.nodes[k]) * space.basis_deriv(q.nodes[k]).transpose();
  Triplets t;
  for (int e = 0; e < space.n_elements(); ++e)
    for (int i = 0; i < nl; ++i)
      for (int j = 0; j < nl; ++j)
        if (block(i, j) != 0.0) t.emplace_back(space.dof(e, i), space.dof(e, j), block(i, j));
  return from_triplets(space.n_dofs(), t);
}

SpMat assemble_stiffness(const DGSpace& space, const Coefficient& k) {
  const Rule q = gauss_legendre_rule(space.quadrature_points(k.degree));
  const int nl = space.n_local();
  Triplets t;
  for (int e = 0; e < space.n_elements(); ++e) {
    Mat block = Mat::Zero(nl, nl);
    const double jac = space.jacobian(e);
    for (std::size_t p = 0; p < q.nodes.size(); ++p) {
      const Vec dphi = space.basis_deriv(q.nodes[p]) / jac;
      block += (q.weights[p] * jac * k(space.to_physical(e, q.nodes[p]))) * dphi * dphi.transpose();
    }
    for (int i = 0; i < nl; ++i)
      for (int j = 0; j < nl; ++j)
        if (block(i, j) != 0.0) t.emplace_back(space.dof(e, i), space.dof(e, j), block(i, j));
  }
  return from_triplets(space.n_dofs(), t);
}

SpMat assemble_face_upwind(const DGSpace& space, double mu) {
  if (mu == 0.0) fail(ErrorCode::InvalidArgument, "face matrix needs mu != 0");
  Triplets t;
  for (const Face& f : faces(space)) {
    const LinComb jump = face_jump(space, f), avg = face_avg(space, f);
    add_outer(t, avg, jump, -mu * f.normal);
    add_outer(t, jump, jump, 0.5 * std::abs(mu));
  }
  return from_triplets(space.n_dofs(), t);
}

SpMat assemble_face_adjoint(const DGSpace& space, double mu) {
  if (mu == 0.0) fail(ErrorCode::InvalidArgument, "face matrix needs mu != 0");
  Triplets t;
  for (const Face& f : faces(space)) {
    const LinComb jump = face_jump(space, f), avg = face_avg(space, f);
    add_outer(t, jump, avg, mu * f.normal);
    add_outer(t, jump, jump, 0.5 * std::abs(mu));
  }
  return from_triplets(space.n_dofs(), t);
}

Moments assemble_moments(const DGSpace& space, const DirectionSet& dirs) {
  const int n = space.n_dofs();
  Moments m{SpMat(n, n), SpMat(n, n), SpMat(n, n)};
  for (int d = 0; d < dirs.size(); ++d) {
    const double w = dirs.w[d] / dirs.normalization;
    const SpMat f = assemble_face_upwind(space, dirs.mu[d]);
    const SpMat ft = assemble_face_adjoint(space, dirs.mu[d]);
    m.F0 += w * f;
    m.F1 += (w * dirs.mu[d]) * f;
    m.Ft1 += (w * dirs.mu[d]) * ft;
  }
  m.F0.makeCompressed();
  m.F1.makeCompressed();
  m.Ft1.makeCompressed();
  return m;
}

Vec assemble_load(const DGSpace& space, const std::function<double(double)>& f, int degree) {
  const Rule q = gauss_legendre_rule(space.quadrature_points(degree));
  Vec b = Vec::Zero(space.n_dofs());
  for (int e = 0; e < space.n_elements(); ++e) {
    for (std::size_t k = 0; k < q.nodes.size(); ++k) {
      const double x = space.to_physical(e, q.nodes[k]);
      b.segment(space.dof(e, 0), space.n_local()) +=
          (q.weights[k] * space.jacobian(e) * f(x)) * space.basis(q.nodes[k]);
    }
  }
  return b;
}

std::vector<double> element_means(const DGSpace& space, const Coefficient& c) {
  const Rule q = gauss_legendre_rule(space.quadrature_points(c.degree));
  std::vector<double> out(space.n_elements(), 0.0);
  for (int e = 0; e < space.n_elements(); ++e) {
    for (std::size_t k = 0; k < q.nodes.size(); ++k) out[e] += q.weights[k] * c(space.to_physical(e, q.nodes[k]));
    out[e] *= 0.5;
  }
  return out;
}

}  // namespace slabdsa
