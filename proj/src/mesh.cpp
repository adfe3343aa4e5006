#include "slabdsa/mesh.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

#include "slabdsa/errors.hpp"

namespace slabdsa {

Mesh uniform_mesh(double a, double b, int n) {
  if (!(a < b)) fail(ErrorCode::InvalidArgument, "mesh needs a < b");
  if (n < 1) fail(ErrorCode::InvalidArgument, "mesh needs at least one element");
  Mesh m;
  m.vertices.resize(n + 1);
  for (int i = 0; i <= n; ++i) m.vertices[i] = a + (b - a) * static_cast<double>(i) / n;
  m.vertices[n] = b;
  return m;
}

Mesh mesh_from_vertices(std::vector<double> vertices) {
  if (vertices.size() < 2) fail(ErrorCode::InvalidArgument, "mesh needs at least two vertices");
  for (std::size_t i = 1; i < vertices.size(); ++i)
    if (!(vertices[i] > vertices[i - 1]))
      fail(ErrorCode::InvalidArgument, "mesh vertices must be strictly increasing");
  return Mesh{std::move(vertices)};
}

SweepOrdering::SweepOrdering(const Mesh& mesh, const DirectionSet& dirs,
                             std::vector<std::vector<int>> orders)
    : n_elements_(mesh.n_elements()), orders_(std::move(orders)) {
  const int nd = dirs.size();
  if (static_cast<int>(orders_.size()) != nd)
    fail(ErrorCode::InvalidArgument, "one element order per direction is required");
  sign_.resize(nd);
  positions_.assign(nd, std::vector<int>(n_elements_, -1));
  upper_.assign(nd, std::vector<bool>(std::max(n_elements_ - 1, 0), false));
  for (int d = 0; d < nd; ++d) {
    if (dirs.mu[d] == 0.0) fail(ErrorCode::InvalidArgument, "direction with mu = 0");
    sign_[d] = dirs.mu[d] > 0 ? 1 : -1;
    if (static_cast<int>(orders_[d].size()) != n_elements_)
      fail(ErrorCode::InvalidArgument, "element order has wrong length");
    for (int p = 0; p < n_elements_; ++p) {
      const int e = orders_[d][p];
      if (e < 0 || e >= n_elements_ || positions_[d][e] != -1)
        fail(ErrorCode::InvalidArgument, "element order is not a permutation");
      positions_[d][e] = p;
    }
    for (int f = 0; f + 1 < n_elements_; ++f) {
      const int into = sign_[d] > 0 ? f + 1 : f;
      const int from = sign_[d] > 0 ? f : f + 1;
      upper_[d][f] = is_upper(d, into, from);
    }
  }
}

int SweepOrdering::upwind_neighbor(int d, int e) const {
  const int nb = e - sign_[d];
  return (nb >= 0 && nb < n_elements_) ? nb : -1;
}

int SweepOrdering::upper_count(int d) const {
  return static_cast<int>(std::count(upper_[d].begin(), upper_[d].end(), true));
}

int SweepOrdering::upper_count() const {
  int n = 0;
  for (int d = 0; d < n_directions(); ++d) n += upper_count(d);
  return n;
}

namespace {

std::vector<int> upwind_chain(int n, double mu) {
  std::vector<int> c(n);
  std::iota(c.begin(), c.end(), 0);
  if (mu < 0) std::reverse(c.begin(), c.end());
  return c;
}

}  // namespace

SweepOrdering upwind_ordering(const Mesh& mesh, const DirectionSet& dirs) {
  std::vector<std::vector<int>> orders;
  for (int d = 0; d < dirs.size(); ++d) orders.push_back(upwind_chain(mesh.n_elements(), dirs.mu[d]));
  return SweepOrdering(mesh, dirs, std::move(orders));
}

SweepOrdering adversarial_ordering(const Mesh& mesh, const DirectionSet& dirs, double fraction,
                                   std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0))
    fail(ErrorCode::InvalidArgument, "adversarial fraction must lie in [0, 1]");
  const int n = mesh.n_elements();
  const int n_couplings = std::max(n - 1, 0);
  const int n_cut = static_cast<int>(fraction * n_couplings);
  std::vector<std::vector<int>> orders;
  for (int d = 0; d < dirs.size(); ++d) {
    const std::vector<int> chain = upwind_chain(n, dirs.mu[d]);
    // Link k joins chain[k] -> chain[k+1].
    std::vector<int> links(n_couplings);
    std::iota(links.begin(), links.end(), 0);
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(d));
    std::shuffle(links.begin(), links.end(), rng);
    std::vector<bool> cut(n_couplings, false);
    for (int k = 0; k < n_cut; ++k) cut[links[k]] = true;

    std::vector<std::vector<int>> segments(1);
    for (int k = 0; k < n; ++k) {
      segments.back().push_back(chain[k]);
      if (k < n_couplings && cut[k]) segments.emplace_back();
    }
    std::vector<int> order;
    for (auto it = segments.rbegin(); it != segments.rend(); ++it)
      order.insert(order.end(), it->begin(), it->end());
    orders.push_back(std::move(order));
  }
  return SweepOrdering(mesh, dirs, std::move(orders));
}

}  // namespace slabdsa
