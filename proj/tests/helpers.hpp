#pragma once

#include <cmath>
#include <random>

#include "slabdsa/linalg.hpp"

namespace testutil {

inline slabdsa::Vec random_vec(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  slabdsa::Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

inline slabdsa::Mat random_mat(int r, int c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  slabdsa::Mat m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = u(rng);
  return m;
}

inline double rel_diff(const slabdsa::Mat& a, const slabdsa::Mat& b) {
  const double s = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
  return s == 0.0 ? 0.0 : (a - b).cwiseAbs().maxCoeff() / s;
}

}  // namespace testutil
