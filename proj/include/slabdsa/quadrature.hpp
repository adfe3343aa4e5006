#pragma once

#include <vector>

namespace slabdsa {

// Nodes and weights on [-1, 1], nodes ascending.
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule, n >= 1. Exact through degree 2n-1.
Rule gauss_legendre_rule(int n);

// n-point Gauss-Lobatto-Legendre rule, n >= 2; includes both endpoints.
// n = 1 returns the midpoint with weight 2.
Rule gauss_lobatto_rule(int n);

// Legendre polynomial P_n and its derivative at x.
void legendre(int n, double x, double& p, double& dp);

// Slab S_N directions. The weights sum to `normalization` (2 in slab geometry,
// the measure of mu in [-1, 1]).
struct DirectionSet {
  std::vector<double> mu;
  std::vector<double> w;
  double normalization = 2.0;

  int size() const { return static_cast<int>(mu.size()); }
};

// Gauss-Legendre S_N set. n_angles must be positive and even so that no
// direction sits at mu = 0.
DirectionSet gauss_legendre_set(int n_angles);

// alpha = (1/Sigma) sum_d w_d |mu_d|. Tends to 1/2 as n_angles grows.
double face_alpha(const DirectionSet& dirs);

}  // namespace slabdsa
