#pragma once

#include <cstdint>
#include <vector>

#include "slabdsa/quadrature.hpp"

namespace slabdsa {

struct Mesh {
  std::vector<double> vertices;

  int n_elements() const { return static_cast<int>(vertices.size()) - 1; }
  int n_faces() const { return static_cast<int>(vertices.size()); }
  double h(int e) const { return vertices[e + 1] - vertices[e]; }
  double center(int e) const { return 0.5 * (vertices[e] + vertices[e + 1]); }
  double a() const { return vertices.front(); }
  double b() const { return vertices.back(); }
};

Mesh uniform_mesh(double a, double b, int n);
Mesh mesh_from_vertices(std::vector<double> vertices);

// Per-direction element processing order. Interior face i sits between
// elements i and i+1 and carries exactly one upwind coupling per direction:
// into i+1 from i when mu > 0, into i from i+1 when mu < 0. A coupling is
// "upper" (belongs to H_>) when its source element comes later in the order.
class SweepOrdering {
 public:
  SweepOrdering() = default;
  SweepOrdering(const Mesh& mesh, const DirectionSet& dirs, std::vector<std::vector<int>> orders);

  int n_directions() const { return static_cast<int>(orders_.size()); }
  int n_elements() const { return n_elements_; }
  const std::vector<int>& order(int d) const { return orders_[d]; }
  int position(int d, int e) const { return positions_[d][e]; }

  // Element feeding element e across its inflow interior face, or -1.
  int upwind_neighbor(int d, int e) const;
  // True when the coupling into e from `from` is in H_>.
  bool is_upper(int d, int e, int from) const { return positions_[d][from] > positions_[d][e]; }
  // Classification per interior face for direction d.
  const std::vector<bool>& upper_faces(int d) const { return upper_[d]; }
  int upper_count(int d) const;
  int upper_count() const;
  // True when H_> is empty for every direction.
  bool triangular() const { return upper_count() == 0; }

 private:
  int n_elements_ = 0;
  std::vector<int> sign_;
  std::vector<std::vector<int>> orders_;
  std::vector<std::vector<int>> positions_;
  std::vector<std::vector<bool>> upper_;
};

// Left-to-right for mu > 0, right-to-left for mu < 0.
SweepOrdering upwind_ordering(const Mesh& mesh, const DirectionSet& dirs);

// For every direction, floor(fraction * (n_elements - 1)) interior couplings,
// chosen by the seed, are cut from the upwind chain. The resulting chain
// segments are processed in reverse order, so exactly the cut couplings land
// in H_>.
SweepOrdering adversarial_ordering(const Mesh& mesh, const DirectionSet& dirs, double fraction,
                                   std::uint64_t seed);

}  // namespace slabdsa
