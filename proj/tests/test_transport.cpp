#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "slabdsa/errors.hpp"
#include "slabdsa/transport.hpp"

using namespace slabdsa;
using testutil::random_vec;
using testutil::rel_diff;

namespace {

ProblemData make_data(double st, double sa, double q = 0.0) {
  ProblemData pd;
  pd.sigma_t = Coefficient::constant(st);
  pd.sigma_a = Coefficient::constant(sa);
  pd.source = [q](double, double) { return q; };
  pd.source_degree = 0;
  return pd;
}

ProblemData smooth_data() {
  ProblemData pd;
  pd.sigma_t = Coefficient::constant(1.0);
  pd.sigma_a = Coefficient::constant(1.0);
  pd.source = [](double x, double) { return 2 * std::pow(std::sin(3 * x * x), 2) + std::pow(std::cos(x / 3), 2); };
  return pd;
}

// Dense (I + eps H^(d)) built from the assembled pieces.
Mat dense_sweep_matrix(const TransportSystem& sys, int d) {
  const Mat Mt = Mat(sys.Mt);
  const Mat A = Mat(sys.dirs().mu[d] * sys.G + sys.F[d]);
  return Mat::Identity(sys.n_dofs(), sys.n_dofs()) + sys.eps() * Mt.inverse() * A;
}

}  // namespace

TEST_CASE("source and inflow vectors") {
  const DGSpace s0(uniform_mesh(0.0, 2.0, 5), 0);
  const TransportSystem sys(s0, gauss_legendre_set(2), 0.5, make_data(1.0, 0.0, 1.0));
  for (int d = 0; d < 2; ++d) {
    for (int i = 0; i < 5; ++i) CHECK(sys.q[d](i) == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(sys.qinc[d].cwiseAbs().maxCoeff() == 0.0);
  }

  ProblemData pd = make_data(1.0, 0.0);
  pd.inflow = [](double x, double mu) { return x < 0.5 ? 2.0 : 0.0 * mu; };
  const DGSpace s(uniform_mesh(0.0, 1.0, 3), 2);
  const DirectionSet q = gauss_legendre_set(2);
  const TransportSystem sys2(s, q, 0.1, pd);
  for (int d = 0; d < 2; ++d) {
    Vec expect = Vec::Zero(s.n_dofs());
    // Inflow is through x=0 for mu>0 only; the right boundary value is 0.
    if (q.mu[d] > 0) expect(0) = std::abs(q.mu[d]) * 2.0;
    CHECK(rel_diff(sys2.qinc[d], expect) < 1e-15);
  }
}

TEST_CASE("H is block lower triangular in the upwind order") {
  const DGSpace s(uniform_mesh(0.0, 1.0, 6), 2);
  const DirectionSet q = gauss_legendre_set(4);
  const TransportSystem sys(s, q, 0.1, make_data(1.0, 0.5));
  const SweepOrdering ord = upwind_ordering(s.mesh(), q);
  for (int d = 0; d < q.size(); ++d) {
    const SpMat H = build_H(sys, d);
    for (int k = 0; k < H.outerSize(); ++k)
      for (SpMat::InnerIterator it(H, k); it; ++it) {
        if (std::abs(it.value()) < 1e-15) continue;
        const int er = static_cast<int>(it.row()) / s.n_local(), ec = static_cast<int>(it.col()) / s.n_local();
        CHECK(ord.position(d, ec) <= ord.position(d, er));
      }
    // Constant u: only elements touching the boundary see anything.
    const Vec hu = H * Vec::Ones(s.n_dofs());
    for (int i = s.n_local(); i < s.n_dofs() - s.n_local(); ++i) CHECK(std::abs(hu(i)) < 1e-12);
  }
}

TEST_CASE("norm of H scales like 1/h") {
  const DirectionSet q = gauss_legendre_set(2);
  auto hnorm = [&](int n) {
    const TransportSystem sys(DGSpace(uniform_mesh(0.0, 1.0, n), 1), q, 0.1, make_data(1.0, 0.0));
    return norm2(Mat(build_H(sys, 1)));
  };
  const double ratio = hnorm(16) / hnorm(8);
  CHECK(ratio > 1.7);
  CHECK(ratio < 2.3);
}

TEST_CASE("sweep against a dense solve") {
  const DGSpace s(uniform_mesh(0.0, 1.0, 7), 3);
  const DirectionSet q = gauss_legendre_set(4);
  const SweepOrdering ord = upwind_ordering(s.mesh(), q);
  std::mt19937_64 rng(11);
  for (double eps : {1e-4, 0.1, 1.0}) {
    const TransportSystem sys(s, q, eps, make_data(2.0, 0.3));
    for (int d = 0; d < q.size(); ++d) {
      const Vec rhs = random_vec(s.n_dofs(), rng);
      const Vec x = sweep(sys, d, ord, rhs);
      const Mat A = dense_sweep_matrix(sys, d);
      CHECK((A * x - rhs).lpNorm<Eigen::Infinity>() <= 1e-12 * rhs.lpNorm<Eigen::Infinity>());
      CHECK(rel_diff(x, A.partialPivLu().solve(rhs)) < 1e-11);
    }
  }
  const SweepOrdering adv = adversarial_ordering(s.mesh(), q, 0.5, 1);
  const TransportSystem sys(s, q, 0.1, make_data(1.0, 0.0));
  CHECK_THROWS_AS(sweep(sys, 0, adv, Vec::Ones(s.n_dofs())), Error);
}

TEST_CASE("scattering operator") {
  const DGSpace s(uniform_mesh(0.0, 1.0, 5), 2);
  const DirectionSet q = gauss_legendre_set(4);
  const SweepOrdering ord = upwind_ordering(s.mesh(), q);
  std::mt19937_64 rng(12);
  const Vec phi = random_vec(s.n_dofs(), rng);
  {
    // Small eps, no absorption: S is close to the identity.
    const TransportSystem sys(s, q, 1e-9, make_data(1.0, 0.0));
    CHECK(rel_diff(apply_S_eps(sys, ord, phi), phi) < 1e-6);
    CHECK(apply_S_eps(sys, ord, Vec::Zero(s.n_dofs())).cwiseAbs().maxCoeff() == 0.0);
  }
  const TransportSystem sys(s, q, 0.3, make_data(1.5, 0.7));
  Mat S = Mat::Zero(s.n_dofs(), s.n_dofs());
  const Mat Mt = Mat(sys.Mt), Ma = Mat(sys.Ma);
  const Mat scat = (Mat::Identity(s.n_dofs(), s.n_dofs()) - 0.09 * Mt.inverse() * Ma) / 2.0;
  for (int d = 0; d < q.size(); ++d) S += q.w[d] * dense_sweep_matrix(sys, d).inverse() * scat;
  CHECK(rel_diff(apply_S_eps(sys, ord, phi), S * phi) < 1e-11);
}

TEST_CASE("direct solve, residual and zero source") {
  const DGSpace s(uniform_mesh(0.0, 1.0, 6), 2);
  const DirectionSet q = gauss_legendre_set(4);
  const TransportSystem sys(s, q, 0.05, smooth_data());
  const AngularFlux psi = direct_solve(sys);
  CHECK(compute_residual(sys, psi) <= 1e-10);

  // Independent dense assembly of the coupled system.
  const int n = s.n_dofs(), nd = q.size();
  Mat A = Mat::Zero(n * nd, n * nd);
  Vec b(n * nd);
  const double eps = sys.eps();
  for (int d = 0; d < nd; ++d) {
    A.block(d * n, d * n, n, n) += Mat(q.mu[d] * sys.G + sys.F[d] + sys.Mt / eps);
    for (int e = 0; e < nd; ++e) A.block(d * n, e * n, n, n) -= q.w[e] / 2.0 * Mat(sys.Mt / eps - eps * sys.Ma);
    b.segment(d * n, n) = (sys.qinc[d] + eps * sys.q[d]) / 2.0;
  }
  const Vec x = A.partialPivLu().solve(b);
  for (int d = 0; d < nd; ++d) CHECK(rel_diff(psi[d], x.segment(d * n, n)) < 1e-9);

  AngularFlux zero(nd, Vec::Zero(n));
  double expect = 0.0;
  for (int d = 0; d < nd; ++d) expect = std::max(expect, ((sys.qinc[d] + eps * sys.q[d]) / 2.0).lpNorm<Eigen::Infinity>());
  CHECK(compute_residual(sys, zero) == doctest::Approx(expect).epsilon(1e-14));

  const TransportSystem empty(s, q, 0.05, make_data(1.0, 1.0));
  const IterationResult r = source_iteration(empty, upwind_ordering(s.mesh(), q), nullptr, 10, 1e-12);
  CHECK(r.history.converged);
  CHECK(r.history.iterations() == 0);
  CHECK(r.phi.cwiseAbs().maxCoeff() == 0.0);
  const AngularFlux zpsi = direct_solve(empty);
  CHECK(zpsi[0].cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("source iteration converges to the direct solution when thin") {
  const DGSpace s(uniform_mesh(0.0, 1.0, 8), 2);
  const DirectionSet q = gauss_legendre_set(4);
  const TransportSystem sys(s, q, 0.75, smooth_data());
  const AngularFlux ref = direct_solve(sys);
  const IterationResult r = source_iteration(sys, upwind_ordering(s.mesh(), q), nullptr, 40, 1e-10, &ref);
  CHECK(r.history.converged);
  CHECK(r.history.rows.back().reference_error < 1e-8);
  for (int d = 0; d < q.size(); ++d) CHECK(rel_diff(r.psi[d], ref[d]) < 1e-8);
  CHECK(r.history.rows.back().residual_inf < r.history.rows.front().residual_inf);
  long prev = 0;
  for (const auto& row : r.history.rows) {
    CHECK(row.cumulative_sweeps == prev + q.size());
    prev = row.cumulative_sweeps;
  }
}

TEST_CASE("source iteration stagnates when thick") {
  const DGSpace s(uniform_mesh(0.0, 1.0, 8), 2);
  const DirectionSet q = gauss_legendre_set(4);
  const TransportSystem sys(s, q, 1e-3, smooth_data());
  const IterationResult r = source_iteration(sys, upwind_ordering(s.mesh(), q), nullptr, 20, 1e-10);
  CHECK_FALSE(r.history.converged);
  const auto& rows = r.history.rows;
  const double rate = rows[19].error_inf / rows[18].error_inf;
  CHECK(rate > 0.99);
}

TEST_CASE("divergence rule") {
  auto rows_of = [](std::vector<double> errs) {
    std::vector<IterationRow> rows;
    for (double e : errs) rows.push_back({static_cast<int>(rows.size()) + 1, e, 0.0, 0, 0.0});
    return rows;
  };
  CHECK_FALSE(divergence_detected(rows_of({1, 2, 3, 4, 5})));
  CHECK(divergence_detected(rows_of({1, 2, 4, 8, 16, 32})));
  CHECK_FALSE(divergence_detected(rows_of({1, 2, 4, 3, 16, 32})));
  CHECK_FALSE(divergence_detected(rows_of({1, 1.2, 1.5, 2, 3, 5})));  // growth below 10x
  CHECK(divergence_detected(rows_of({1, NAN})));
  CHECK(divergence_detected(rows_of({1, INFINITY})));
}

TEST_CASE("history csv and grouping") {
  IterationHistory h;
  for (int i = 1; i <= 7; ++i) h.rows.push_back({i, 1.0 / i, 0.5 / i, 3L * i, NAN});
  std::ostringstream out;
  h.write_csv(out);
  const std::string s = out.str();
  CHECK(s.rfind("iter,error_inf,residual_inf,cumulative_sweeps\n", 0) == 0);
  CHECK(s.find("1,1.0000000000000000e+00,5.0000000000000000e-01,3\n") != std::string::npos);
  const IterationHistory g = h.grouped(3);
  REQUIRE(g.rows.size() == 3);
  CHECK(g.rows[0].cumulative_sweeps == 9);
  CHECK(g.rows[2].cumulative_sweeps == 21);
  CHECK(g.rows[2].iter == 3);
  CHECK(h.first_below(0.3) == 4);
  CHECK(h.sweeps() == 21);
}

TEST_CASE("invalid inputs") {
  const DGSpace s(uniform_mesh(0.0, 1.0, 3), 1);
  CHECK_THROWS_AS(TransportSystem(s, gauss_legendre_set(2), 0.0, make_data(1.0, 0.0)), Error);
  CHECK_THROWS_AS(TransportSystem(s, gauss_legendre_set(2), 0.1, make_data(-1.0, 0.0)), Error);
  CHECK_THROWS_AS(TransportSystem(s, gauss_legendre_set(2), 0.1, make_data(1.0, -1.0)), Error);
}
