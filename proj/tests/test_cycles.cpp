#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "slabdsa/cycles.hpp"
#include "slabdsa/dsa.hpp"
#include "slabdsa/errors.hpp"
#include "slabdsa/oracles.hpp"

using namespace slabdsa;
using testutil::random_mat;
using testutil::random_vec;
using testutil::rel_diff;

namespace {

ProblemData preset_like() {
  ProblemData pd;
  pd.sigma_t = Coefficient::constant(1.0);
  pd.sigma_a = Coefficient::constant(1.0);
  pd.source = [](double x, double) { return 2 * std::pow(std::sin(3 * x * x), 2) + std::pow(std::cos(x / 3), 2); };
  return pd;
}

}  // namespace

TEST_CASE("splitting reproduces H") {
  const DGSpace s(uniform_mesh(0.0, 1.0, 9), 2);
  const DirectionSet q = gauss_legendre_set(4);
  const TransportSystem sys(s, q, 0.1, preset_like());
  for (double f : {0.0, 0.5, 1.0}) {
    const SweepOrdering ord = adversarial_ordering(s.mesh(), q, f, 4);
    const SplitSystem sp = split_H(sys, ord);
    for (int d = 0; d < q.size(); ++d) {
      CHECK(max_abs(SpMat(sp.H_le[d] + sp.H_gt[d] - build_H(sys, d))) == doctest::Approx(0.0));
      const int nl = s.n_local();
      for (int k = 0; k < sp.H_le[d].outerSize(); ++k)
        for (SpMat::InnerIterator it(sp.H_le[d], k); it; ++it) {
          if (it.value() == 0.0) continue;
          const int e = static_cast<int>(it.row()) / nl, from = static_cast<int>(it.col()) / nl;
          CHECK(ord.position(d, from) <= ord.position(d, e));
          if (f == 1.0) CHECK(e == from);
        }
      if (f == 0.0) CHECK(max_abs(sp.H_gt[d]) == 0.0);
      if (f > 0.0) CHECK(max_abs(sp.H_gt[d]) > 0.0);
    }
  }
}

TEST_CASE("lagged sweeps equal the truncated series") {
  const DGSpace s(uniform_mesh(0.0, 1.0, 6), 1);
  const DirectionSet q = gauss_legendre_set(2);
  const TransportSystem sys(s, q, 0.05, preset_like());
  const SweepOrdering ord = adversarial_ordering(s.mesh(), q, 0.6, 9);
  const SplitSystem sp = split_H(sys, ord);
  const int n = s.n_dofs();
  std::mt19937_64 rng(31);
  AngularFlux rhs;
  for (int d = 0; d < q.size(); ++d) rhs.push_back(random_vec(n, rng));
  for (int k = 1; k <= 4; ++k) {
    const AngularFlux x = lagged_sweeps(sp, k, rhs);
    for (int d = 0; d < q.size(); ++d) {
      const Mat I = Mat::Identity(n, n);
      const Mat Ainv = (I + 0.05 * Mat(sp.H_le[d])).inverse();
      const Mat X = -0.05 * Ainv * Mat(sp.H_gt[d]);
      Mat series = Mat::Zero(n, n), Xl = I;
      for (int l = 0; l < k; ++l) {
        series += Xl;
        Xl = X * Xl;
      }
      CHECK(rel_diff(x[d], series * Ainv * rhs[d]) < 1e-11);
    }
  }
  CHECK_THROWS_AS(lagged_sweeps(sp, 0, rhs), Error);

  // Without lagged couplings every k gives the exact sweep.
  const SplitSystem up = split_H(sys, upwind_ordering(s.mesh(), q));
  const AngularFlux x1 = lagged_sweeps(up, 1, rhs), x3 = lagged_sweeps(up, 3, rhs);
  for (int d = 0; d < q.size(); ++d) {
    CHECK(rel_diff(x1[d], x3[d]) < 1e-15);
    CHECK(rel_diff(x1[d], sweep(sys, d, upwind_ordering(s.mesh(), q), rhs[d])) < 1e-15);
  }
}

TEST_CASE("residual of three lagged sweeps is third order") {
  const DGSpace s(uniform_mesh(0.0, 1.0, 8), 1);
  const DirectionSet q = gauss_legendre_set(2);
  const SweepOrdering ord = chained_adversarial_ordering(s.mesh(), q, 0.5, 2024, 3);
  CHECK(longest_upper_chain(ord) >= 3);
  std::mt19937_64 rng(32);
  AngularFlux rhs;
  for (int d = 0; d < q.size(); ++d) rhs.push_back(random_vec(s.n_dofs(), rng));
  std::vector<double> res;
  // 1e-2 is still pre-asymptotic on this mesh (eps |H| is about 0.5).
  for (double eps : {1e-3, 1e-4}) {
    const TransportSystem sys(s, q, eps, preset_like());
    const SplitSystem sp = split_H(sys, ord);
    const AngularFlux x = lagged_sweeps(sp, 3, rhs);
    double r = 0.0;
    for (int d = 0; d < q.size(); ++d) {
      const Vec ax = x[d] + eps * (build_H(sys, d) * x[d]);
      r = std::max(r, (ax - rhs[d]).lpNorm<Eigen::Infinity>());
    }
    res.push_back(r);
  }
  const double ratio = res[0] / res[1];
  CHECK(ratio > 300.0);
  CHECK(ratio < 3000.0);
}

TEST_CASE("lagged sweep identity on dense matrices") {
  std::mt19937_64 rng(33);
  for (int t = 0; t < 5; ++t) {
    const Mat hle = random_mat(20, 20, rng), hgt = random_mat(20, 20, rng), b = random_mat(20, 20, rng);
    const LaggedIdentityReport rep = verify_lagged_identity(hle, hgt, b, 0.1, 3);
    CHECK(rep.discrepancy <= 1e-10);
    CHECK(rep.n == 20);
    CHECK(rep.scale > 0.0);
  }
  const Mat hle = random_mat(10, 10, rng), b = random_mat(10, 10, rng);
  const LaggedIdentityReport zero = verify_lagged_identity(hle, Mat::Zero(10, 10), b, 0.2, 4);
  CHECK(zero.discrepancy <= 1e-13);
  try {
    verify_lagged_identity(-Mat::Identity(4, 4), Mat::Zero(4, 4), Mat::Identity(4, 4), 1.0, 2);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidInstance);
  }
  std::ostringstream out;
  zero.write_csv_row(out, true);
  CHECK(out.str().rfind("n,eps,k,discrepancy,scale\n10,", 0) == 0);
}

TEST_CASE("inner sweeps with an upwind ordering reduce to source iteration") {
  const DGSpace s(uniform_mesh(0.0, 1.0, 10), 2);
  const DirectionSet q = gauss_legendre_set(4);
  const TransportSystem sys(s, q, 1e-2, preset_like());
  const Preconditioner pre(sys, PrecondKind::IP);
  const SweepOrdering up = upwind_ordering(s.mesh(), q);
  const IterationResult a = iterate_with_inners(sys, up, &pre, 0, false, 30, 1e-10);
  const IterationResult b = source_iteration(sys, up, &pre, 30, 1e-10);
  REQUIRE(a.history.iterations() == b.history.iterations());
  for (int i = 0; i < a.history.iterations(); ++i) {
    CHECK(a.history.rows[i].error_inf == b.history.rows[i].error_inf);
    CHECK(a.history.rows[i].cumulative_sweeps == b.history.rows[i].cumulative_sweeps);
  }
}

TEST_CASE("extra lagged sweeps restore convergence under an adversarial ordering") {
  const DGSpace s(uniform_mesh(0.0, 1.0, 10), 1);
  const DirectionSet q = gauss_legendre_set(4);
  const TransportSystem sys(s, q, 1e-4, preset_like());
  const Preconditioner pre(sys, PrecondKind::IP);
  const SweepOrdering ord = adversarial_ordering(s.mesh(), q, 0.5, 7);
  const IterationResult three = iterate_with_inners(sys, ord, &pre, 2, false, 60, 1e-10);
  const IterationResult one = iterate_with_inners(sys, ord, &pre, 0, false, 60, 1e-10);
  CHECK(three.history.converged);
  CHECK_FALSE(one.history.converged);
  for (std::size_t i = 0; i < three.history.rows.size(); ++i)
    CHECK(three.history.rows[i].cumulative_sweeps == static_cast<long>(3 * q.size() * (i + 1)));
  const AngularFlux ref = direct_solve(sys);
  double err = 0.0;
  for (int d = 0; d < q.size(); ++d) err = std::max(err, (three.psi[d] - ref[d]).lpNorm<Eigen::Infinity>());
  CHECK(err < 1e-8);
}
