#include <doctest.h>

#include <algorithm>

#include "slabdsa/errors.hpp"
#include "slabdsa/mesh.hpp"

using namespace slabdsa;

TEST_CASE("uniform mesh") {
  const Mesh m = uniform_mesh(0.0, 1.0, 4);
  CHECK(m.n_elements() == 4);
  CHECK(m.n_faces() == 5);
  for (int e = 0; e < 4; ++e) CHECK(m.h(e) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(uniform_mesh(0.0, 7.0, 100).vertices.size() == 101);
  const Mesh one = uniform_mesh(0.0, 1.0, 1);
  CHECK(one.n_faces() == 2);
  CHECK(one.b() == 1.0);
}

TEST_CASE("mesh validation") {
  CHECK_THROWS_AS(uniform_mesh(1.0, 1.0, 3), Error);
  CHECK_THROWS_AS(uniform_mesh(0.0, 1.0, 0), Error);
  CHECK_THROWS_AS(mesh_from_vertices({0.0, 0.5, 0.5, 1.0}), Error);
  const Mesh m = mesh_from_vertices({0.0, 0.1, 0.5, 1.0});
  CHECK(m.h(1) == doctest::Approx(0.4));
}

TEST_CASE("upwind ordering") {
  const Mesh m = uniform_mesh(0.0, 1.0, 3);
  const DirectionSet q = gauss_legendre_set(2);  // mu[0] < 0 < mu[1]
  const SweepOrdering o = upwind_ordering(m, q);
  CHECK(o.order(1) == std::vector<int>{0, 1, 2});
  CHECK(o.order(0) == std::vector<int>{2, 1, 0});
  CHECK(o.triangular());
  CHECK(o.upwind_neighbor(1, 1) == 0);
  CHECK(o.upwind_neighbor(1, 0) == -1);
  CHECK(o.upwind_neighbor(0, 1) == 2);
  CHECK(o.upwind_neighbor(0, 2) == -1);
}

TEST_CASE("adversarial ordering counts and extremes") {
  const DirectionSet q = gauss_legendre_set(4);
  for (int n : {3, 7, 20}) {
    const Mesh m = uniform_mesh(0.0, 1.0, n);
    for (double f : {0.0, 0.25, 0.5, 1.0}) {
      const SweepOrdering o = adversarial_ordering(m, q, f, 11);
      for (int d = 0; d < q.size(); ++d) {
        CHECK(o.upper_count(d) == static_cast<int>(f * (n - 1)));
        // Each interior face carries exactly one coupling, classified once.
        CHECK(static_cast<int>(o.upper_faces(d).size()) == n - 1);
        std::vector<int> sorted = o.order(d);
        std::sort(sorted.begin(), sorted.end());
        for (int e = 0; e < n; ++e) CHECK(sorted[e] == e);
      }
    }
  }
  const Mesh m3 = uniform_mesh(0.0, 1.0, 3);
  const SweepOrdering zero = adversarial_ordering(m3, q, 0.0, 5);
  const SweepOrdering up = upwind_ordering(m3, q);
  for (int d = 0; d < q.size(); ++d) CHECK(zero.order(d) == up.order(d));
  const SweepOrdering all = adversarial_ordering(m3, q, 1.0, 5);
  for (int d = 0; d < q.size(); ++d) CHECK(all.upper_count(d) == 2);
}

TEST_CASE("adversarial ordering classification matches positions") {
  const Mesh m = uniform_mesh(0.0, 1.0, 12);
  const DirectionSet q = gauss_legendre_set(2);
  const SweepOrdering o = adversarial_ordering(m, q, 0.5, 3);
  for (int d = 0; d < q.size(); ++d) {
    for (int e = 0; e < 12; ++e) {
      const int up = o.upwind_neighbor(d, e);
      if (up < 0) continue;
      const int face = std::min(e, up);
      CHECK(o.is_upper(d, e, up) == static_cast<bool>(o.upper_faces(d)[face]));
    }
  }
}

TEST_CASE("adversarial ordering is deterministic by seed") {
  const Mesh m = uniform_mesh(0.0, 1.0, 30);
  const DirectionSet q = gauss_legendre_set(4);
  const SweepOrdering a = adversarial_ordering(m, q, 0.5, 42), b = adversarial_ordering(m, q, 0.5, 42);
  const SweepOrdering c = adversarial_ordering(m, q, 0.5, 43);
  bool differs = false;
  for (int d = 0; d < q.size(); ++d) {
    CHECK(a.order(d) == b.order(d));
    CHECK(a.upper_faces(d) == b.upper_faces(d));
    differs = differs || a.upper_faces(d) != c.upper_faces(d);
  }
  CHECK(differs);
  CHECK_THROWS_AS(adversarial_ordering(m, q, 1.5, 1), Error);
}
