#include "slabdsa/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "slabdsa/errors.hpp"

namespace slabdsa {

void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  if (n == 0) {
    p = 1.0;
    dp = 0.0;
    return;
  }
  for (int k = 1; k < n; ++k) {
    const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
    p0 = p1;
    p1 = p2;
  }
  p = p1;
  if (std::abs(x) == 1.0) {
    dp = 0.5 * n * (n + 1.0) * (x > 0 ? 1.0 : (n % 2 == 0 ? -1.0 : 1.0));
  } else {
    dp = n * (x * p1 - p0) / (x * x - 1.0);
  }
}

Rule gauss_legendre_rule(int n) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "Gauss-Legendre rule needs n >= 1");
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double x = -std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double p = 0.0, dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      legendre(n, x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(n, x, p, dp);
    r.nodes[i] = x;
    r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  // Symmetrize so that +-pairs match to the last bit.
  for (int i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (r.nodes[n - 1 - i] - r.nodes[i]);
    const double w = 0.5 * (r.weights[i] + r.weights[n - 1 - i]);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

Rule gauss_lobatto_rule(int n) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "Gauss-Lobatto rule needs n >= 1");
  Rule r;
  if (n == 1) {
    r.nodes = {0.0};
    r.weights = {2.0};
    return r;
  }
  const int m = n - 1;  // interior nodes are roots of P_m'
  r.nodes.assign(n, 0.0);
  r.weights.assign(n, 0.0);
  r.nodes[0] = -1.0;
  r.nodes[m] = 1.0;
  for (int i = 1; i < m; ++i) {
    double x = -std::cos(std::numbers::pi * i / m);
    for (int it = 0; it < 100; ++it) {
      double p = 0.0, dp = 0.0;
      legendre(m, x, p, dp);
      const double d2p = (2.0 * x * dp - m * (m + 1.0) * p) / (1.0 - x * x);
      const double dx = dp / d2p;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.nodes[i] = x;
  }
  for (int i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (r.nodes[n - 1 - i] - r.nodes[i]);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  for (int i = 0; i < n; ++i) {
    double p = 0.0, dp = 0.0;
    legendre(m, r.nodes[i], p, dp);
    r.weights[i] = 2.0 / (m * (m + 1.0) * p * p);
  }
  return r;
}

DirectionSet gauss_legendre_set(int n_angles) {
  if (n_angles < 2 || n_angles % 2 != 0)
    fail(ErrorCode::InvalidArgument,
         "n_angles must be even and >= 2 (got " + std::to_string(n_angles) + ")");
  const Rule r = gauss_legendre_rule(n_angles);
  DirectionSet s;
  s.mu = r.nodes;
  s.w = r.weights;
  s.normalization = 2.0;
  return s;
}

double face_alpha(const DirectionSet& dirs) {
  double acc = 0.0;
  for (int d = 0; d < dirs.size(); ++d) acc += dirs.w[d] * std::abs(dirs.mu[d]);
  return acc / dirs.normalization;
}

}  // namespace slabdsa
