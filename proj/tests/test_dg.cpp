#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "slabdsa/dg.hpp"
#include "slabdsa/errors.hpp"

using namespace slabdsa;
using testutil::random_vec;
using testutil::rel_diff;

namespace {

// Trace of u on element e at its left (xi=-1) or right (xi=+1) end, from the
// Lagrange property: the GLL end nodes are the first and last local dofs.
double end_value(const DGSpace& s, const Vec& u, int e, bool right) {
  return u(s.dof(e, right ? s.degree() : 0));
}

struct FaceValues {
  double normal, jump_u, jump_v, avg_u, avg_v;
};

// Independent face loop: vertex i, left element i-1, right element i.
std::vector<FaceValues> face_values(const DGSpace& s, const Vec& u, const Vec& v) {
  std::vector<FaceValues> out;
  const int ne = s.n_elements();
  for (int i = 0; i <= ne; ++i) {
    FaceValues f{};
    if (i == 0) {
      f.normal = -1.0;
      f.jump_u = end_value(s, u, 0, false);
      f.jump_v = end_value(s, v, 0, false);
      f.avg_u = 0.5 * f.jump_u;
      f.avg_v = 0.5 * f.jump_v;
    } else if (i == ne) {
      f.normal = 1.0;
      f.jump_u = end_value(s, u, ne - 1, true);
      f.jump_v = end_value(s, v, ne - 1, true);
      f.avg_u = 0.5 * f.jump_u;
      f.avg_v = 0.5 * f.jump_v;
    } else {
      f.normal = 1.0;
      const double ul = end_value(s, u, i - 1, true), ur = end_value(s, u, i, false);
      const double vl = end_value(s, v, i - 1, true), vr = end_value(s, v, i, false);
      f.jump_u = ul - ur;
      f.jump_v = vl - vr;
      f.avg_u = 0.5 * (ul + ur);
      f.avg_v = 0.5 * (vl + vr);
    }
    out.push_back(f);
  }
  return out;
}

// sum_e int w(x) a(x) b(x) by a 30-point rule on every element.
double brute_integral(const DGSpace& s, const std::function<double(int, double)>& integrand) {
  const Rule q = gauss_legendre_rule(30);
  double total = 0.0;
  for (int e = 0; e < s.n_elements(); ++e)
    for (std::size_t k = 0; k < q.nodes.size(); ++k) total += q.weights[k] * s.jacobian(e) * integrand(e, q.nodes[k]);
  return total;
}

double fd_derivative(const DGSpace& s, const Vec& u, int e, double xi) {
  const double h = 1e-6;
  return (s.evaluate(u, e, xi + h) - s.evaluate(u, e, xi - h)) / (2 * h) / s.jacobian(e);
}

// Continuous piecewise-polynomial vector vanishing at both ends.
Vec continuous_zero_boundary(const DGSpace& s) {
  const double a = s.mesh().a(), b = s.mesh().b();
  return s.interpolate([&](double x) { return std::sin(M_PI * (x - a) / (b - a)) + 0.3 * (x - a) * (b - x); });
}

}  // namespace

TEST_CASE("nodal basis") {
  for (int r = 0; r <= 6; ++r) {
    const DGSpace s(uniform_mesh(0.0, 1.0, 2), r);
    for (int i = 0; i <= r; ++i) {
      const Vec phi = s.basis(s.ref_nodes()[i]);
      for (int j = 0; j <= r; ++j) CHECK(std::abs(phi(j) - (i == j ? 1.0 : 0.0)) < 1e-13);
    }
    CHECK(s.basis(0.37).sum() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::abs(s.basis_deriv(0.37).sum()) < 1e-11);
    CHECK(s.n_dofs() == 2 * (r + 1));
    CHECK(s.dof(1, 0) == r + 1);
  }
}

TEST_CASE("mass matrix") {
  const DGSpace s1(uniform_mesh(0.0, 1.0, 1), 1);
  const Mat m = Mat(assemble_mass(s1, Coefficient::constant(1.0)));
  CHECK(m(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(m(0, 1) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(m(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(Mat(assemble_mass(s1, Coefficient::constant(0.0))).cwiseAbs().maxCoeff() == 0.0);
  CHECK(rel_diff(Mat(assemble_mass(s1, Coefficient::constant(2.5))), 2.5 * m) < 1e-15);

  const DGSpace s(uniform_mesh(0.0, 2.0, 3), 3);
  const Coefficient sig{[](double x) { return 1.0 + x * x; }, 2};
  const SpMat M = assemble_mass(s, sig, true);
  std::mt19937_64 rng(1);
  for (int t = 0; t < 3; ++t) {
    const Vec u = random_vec(s.n_dofs(), rng), v = random_vec(s.n_dofs(), rng);
    const double ref = brute_integral(s, [&](int e, double xi) {
      const double x = s.to_physical(e, xi);
      return (1 + x * x) * s.evaluate(u, e, xi) * s.evaluate(v, e, xi);
    });
    CHECK(v.dot(M * u) == doctest::Approx(ref).epsilon(1e-13));
  }
  CHECK(rel_diff(Mat(M), Mat(M.transpose())) < 1e-15);
  CHECK(Eigen::SelfAdjointEigenSolver<Mat>(Mat(M)).eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("mass matrix rejects nonpositive opacity") {
  const DGSpace s(uniform_mesh(0.0, 1.0, 4), 2);
  const Coefficient bad{[](double x) { return x - 0.5; }, 1};
  try {
    assemble_mass(s, bad, true);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidCoefficient);
  }
  CHECK_NOTHROW(assemble_mass(s, Coefficient::constant(0.0), false));
}

TEST_CASE("gradient matrix") {
  const DGSpace s1(uniform_mesh(0.0, 1.0, 1), 1);
  const Mat g = Mat(assemble_gradient(s1));
  const Mat expect = (Mat(2, 2) << -0.5, 0.5, -0.5, 0.5).finished();
  CHECK(rel_diff(g, expect) < 1e-15);
  const DGSpace s0(uniform_mesh(0.0, 1.0, 3), 0);
  CHECK(Mat(assemble_gradient(s0)).cwiseAbs().maxCoeff() == 0.0);

  const DGSpace s(uniform_mesh(-1.0, 2.0, 4), 4);
  const SpMat G = assemble_gradient(s);
  CHECK((G * Vec::Ones(s.n_dofs())).cwiseAbs().maxCoeff() < 1e-13);
  std::mt19937_64 rng(2);
  const Vec u = random_vec(s.n_dofs(), rng), v = random_vec(s.n_dofs(), rng);
  // G + G^T integrates (uv)' element by element.
  double ends = 0.0;
  for (int e = 0; e < s.n_elements(); ++e)
    ends += end_value(s, u, e, true) * end_value(s, v, e, true) - end_value(s, u, e, false) * end_value(s, v, e, false);
  CHECK(v.dot(G * u) + u.dot(G * v) == doctest::Approx(ends).epsilon(1e-12));
  const double ref = brute_integral(s, [&](int e, double xi) { return fd_derivative(s, u, e, xi) * s.evaluate(v, e, xi); });
  CHECK(v.dot(G * u) == doctest::Approx(ref).epsilon(1e-7));
}

TEST_CASE("stiffness matrix") {
  const DGSpace s(uniform_mesh(0.0, 1.0, 3), 3);
  const Coefficient k{[](double x) { return 2.0 + x; }, 1};
  const SpMat K = assemble_stiffness(s, k);
  std::mt19937_64 rng(3);
  const Vec u = random_vec(s.n_dofs(), rng), v = random_vec(s.n_dofs(), rng);
  const double ref = brute_integral(s, [&](int e, double xi) {
    return (2.0 + s.to_physical(e, xi)) * fd_derivative(s, u, e, xi) * fd_derivative(s, v, e, xi);
  });
  CHECK(v.dot(K * u) == doctest::Approx(ref).epsilon(1e-7));
}

TEST_CASE("upwind face matrix") {
  // One element, r=1, mu=1: only the inflow face contributes, with
  // -mu n {u}[[v]] + |mu|/2 [[u]][[v]] = (1/2 + 1/2) u0 v0.
  const DGSpace s1(uniform_mesh(0.0, 1.0, 1), 1);
  const Mat f = Mat(assemble_face_upwind(s1, 1.0));
  CHECK(f(0, 0) == doctest::Approx(1.0));
  CHECK(std::abs(f(0, 1)) + std::abs(f(1, 0)) + std::abs(f(1, 1)) < 1e-15);
  const Mat fm = Mat(assemble_face_upwind(s1, -1.0));
  CHECK(fm(1, 1) == doctest::Approx(1.0));
  CHECK_THROWS_AS(assemble_face_upwind(s1, 0.0), Error);
  CHECK_THROWS_AS(assemble_face_adjoint(s1, 0.0), Error);

  const DGSpace s(uniform_mesh(0.0, 1.0, 5), 2);
  for (double mu : {-0.8, 0.3}) {
    const SpMat F = assemble_face_upwind(s, mu);
    const Vec c = F * continuous_zero_boundary(s);
    CHECK(c.cwiseAbs().maxCoeff() < 1e-13);
    // Constant u: interior jumps vanish, so only boundary dofs see anything.
    const Vec one = F * Vec::Ones(s.n_dofs());
    for (int i = 1; i < s.n_dofs() - 1; ++i) CHECK(std::abs(one(i)) < 1e-14);
    std::mt19937_64 rng(4);
    const Vec u = random_vec(s.n_dofs(), rng), v = random_vec(s.n_dofs(), rng);
    double ref = 0.0;
    for (const auto& fv : face_values(s, u, v))
      ref += -mu * fv.normal * fv.jump_u * fv.avg_v + 0.5 * std::abs(mu) * fv.jump_u * fv.jump_v;
    CHECK(v.dot(F * u) == doctest::Approx(ref).epsilon(1e-13));
  }
}

TEST_CASE("adjoint face matrix and integration by parts") {
  for (int r : {0, 1, 3, 5}) {
    const DGSpace s(uniform_mesh(0.0, 3.0, 6), r);
    const SpMat G = assemble_gradient(s);
    for (double mu : {-0.9, -0.2, 0.4, 1.0}) {
      const SpMat F = assemble_face_upwind(s, mu), Ft = assemble_face_adjoint(s, mu);
      const Mat lhs = Mat(mu * G + F), rhs = Mat(-mu * SpMat(G.transpose()) + Ft);
      CHECK(rel_diff(lhs, rhs) < 1e-12);
      if (r >= 1) {
        const Vec p = continuous_zero_boundary(s);
        CHECK((Ft.transpose() * p).cwiseAbs().maxCoeff() < 1e-13);
      }
    }
    // mu -> -mu leaves the penalty part alone.
    const Mat sym_f = Mat(assemble_face_upwind(s, 0.6) + assemble_face_upwind(s, -0.6));
    const Mat sym_ft = Mat(assemble_face_adjoint(s, 0.6) + assemble_face_adjoint(s, -0.6));
    CHECK(rel_diff(sym_f, sym_ft) < 1e-14);
  }
}

TEST_CASE("angular moment matrices") {
  const DGSpace s(uniform_mesh(0.0, 1.0, 7), 2);
  const DirectionSet q = gauss_legendre_set(8);
  const Moments m = assemble_moments(s, q);
  const double alpha = face_alpha(q);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 4; ++t) {
    const Vec u = random_vec(s.n_dofs(), rng), v = random_vec(s.n_dofs(), rng);
    double f0 = 0, f1 = 0, ft1 = 0;
    for (const auto& fv : face_values(s, u, v)) {
      f0 += 0.5 * alpha * fv.jump_u * fv.jump_v;
      f1 += -(1.0 / 3.0) * fv.normal * fv.jump_u * fv.avg_v;
      ft1 += (1.0 / 3.0) * fv.normal * fv.avg_u * fv.jump_v;
    }
    CHECK(v.dot(m.F0 * u) == doctest::Approx(f0).epsilon(1e-13));
    CHECK(v.dot(m.F1 * u) == doctest::Approx(f1).epsilon(1e-13));
    CHECK(v.dot(m.Ft1 * u) == doctest::Approx(ft1).epsilon(1e-13));
    CHECK(u.dot(m.F0 * u) > 0.0);
  }
  CHECK(rel_diff(Mat(m.F0), Mat(m.F0.transpose())) < 1e-15);
  const Vec p = continuous_zero_boundary(s);
  CHECK((m.F0 * p).cwiseAbs().maxCoeff() < 1e-14);
  // Null space of F0 has dimension n_elements * r - 1 (continuous, zero ends).
  Eigen::SelfAdjointEigenSolver<Mat> es(Mat(m.F0));
  int zeros = 0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) zeros += std::abs(es.eigenvalues()(i)) < 1e-12 ? 1 : 0;
  CHECK(zeros == 7 * 2 - 1);
  CHECK(es.eigenvalues().minCoeff() > -1e-13);
}

TEST_CASE("derivative identity for constant opacity") {
  for (int r : {1, 2, 4}) {
    const DGSpace s(uniform_mesh(0.0, 1.5, 5), r);
    const SpMat Mt = assemble_mass(s, Coefficient::constant(3.0));
    const SpMat G = assemble_gradient(s);
    std::mt19937_64 rng(6);
    const Vec u = random_vec(s.n_dofs(), rng);
    Eigen::SimplicialLDLT<SpMat> ldlt(Mt);
    const Vec lhs = ldlt.solve(G * u);
    for (int e = 0; e < s.n_elements(); ++e)
      for (int i = 0; i <= r; ++i) {
        // Differentiate the element polynomial in closed form via finite differences of high order.
        const double xi = s.ref_nodes()[i];
        const double h = 1e-4;
        const double d = (-s.evaluate(u, e, xi + 2 * h) + 8 * s.evaluate(u, e, xi + h) - 8 * s.evaluate(u, e, xi - h) +
                          s.evaluate(u, e, xi - 2 * h)) /
                         (12 * h) / s.jacobian(e);
        CHECK(lhs(s.dof(e, i)) == doctest::Approx(d / 3.0).epsilon(1e-8));
      }
  }
}

TEST_CASE("load vector and element means") {
  const DGSpace s(uniform_mesh(0.0, 2.0, 4), 3);
  const auto f = [](double x) { return std::exp(x) * std::sin(3 * x); };
  const Vec b = assemble_load(s, f);
  std::mt19937_64 rng(7);
  const Vec u = random_vec(s.n_dofs(), rng);
  const double ref = brute_integral(s, [&](int e, double xi) { return f(s.to_physical(e, xi)) * s.evaluate(u, e, xi); });
  CHECK(b.dot(u) == doctest::Approx(ref).epsilon(1e-10));
  const auto means = element_means(s, Coefficient{[](double x) { return x; }, 1});
  for (int e = 0; e < 4; ++e) CHECK(means[e] == doctest::Approx(s.mesh().center(e)).epsilon(1e-14));
}

TEST_CASE("face structure") {
  const DGSpace s(uniform_mesh(0.0, 1.0, 3), 1);
  const auto fs = faces(s);
  REQUIRE(fs.size() == 4);
  CHECK(fs[0].boundary);
  CHECK(fs[0].normal == -1.0);
  CHECK(fs[3].normal == 1.0);
  CHECK(fs[1].sides.size() == 2);
  CHECK(fs[1].sides[0].element == 0);
  CHECK(fs[1].sides[1].jump_weight == -1.0);
}
