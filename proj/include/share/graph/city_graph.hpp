#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "share/numerics/tape.hpp"

namespace share {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct BoundingBox {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 1.0;
  double max_y = 1.0;

  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
  bool contains(Point p) const {
    return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
  }
};

struct ParkingLot {
  std::size_t id = 0;
  Point position;
  int capacity = 1;
  bool labeled = false;
};

/// Validates dense ids 0..N-1 and positive capacities.
void validate_lots(std::span<const ParkingLot> lots);

/// Symmetric N x N table of road distances in km.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n) : n_(n), d_(n * n, 0.0) {}
  DistanceMatrix(std::size_t n, std::vector<double> values);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, double v) {
    d_[i * n_ + j] = v;
    d_[j * n_ + i] = v;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> d_;
};

/// Rectangular street lattice standing in for a real road network.
///
/// Nodes sit at min + i * spacing and cover the bounding box. Each lot attaches
/// to its nearest node (ties go to the lower coordinate); its road distance to
/// another lot is the lattice shortest path between attachment nodes plus both
/// straight-line attachment offsets. Edges off a random spanning tree may be
/// removed, each with probability `blocked_fraction`, to create detours.
class RoadNetwork {
 public:
  RoadNetwork(BoundingBox box, double spacing, std::span<const Point> lots,
              double blocked_fraction = 0.0, std::uint64_t seed = 0);

  double spacing() const { return spacing_; }
  std::size_t nodes_x() const { return nx_; }
  std::size_t nodes_y() const { return ny_; }
  std::size_t num_lots() const { return attach_.size(); }
  std::size_t num_blocked_edges() const { return blocked_count_; }

  std::size_t attachment_node(std::size_t lot) const { return attach_[lot]; }
  double attachment_offset(std::size_t lot) const { return offset_[lot]; }

  double distance(std::size_t i, std::size_t j) const { return distances_(i, j); }
  const DistanceMatrix& distances() const { return distances_; }

 private:
  std::vector<double> shortest_paths(std::size_t source) const;

  BoundingBox box_;
  double spacing_;
  std::size_t nx_ = 0;
  std::size_t ny_ = 0;
  // blocked_[node * 2 + 0]: edge to the +x neighbor, [node * 2 + 1]: edge to +y.
  std::vector<bool> blocked_;
  std::size_t blocked_count_ = 0;
  std::vector<std::size_t> attach_;
  std::vector<double> offset_;
  DistanceMatrix distances_;
};

struct PropagationGraph {
  /// Per lot: every j != i with dist(i, j) <= radius[i]; sorted by id.
  std::shared_ptr<const Csr> neighbors;
  /// Labeled subset of `neighbors`, the PropConv aggregation set.
  std::shared_ptr<const Csr> aggregation;
  std::vector<double> radius;
};

struct CityGraph {
  double epsilon = 1.0;
  std::size_t k = 10;
  std::shared_ptr<const Csr> context;
  PropagationGraph propagation;
};

/// e_ij = 1 iff dist(i, j) <= epsilon; includes self-loops; rows sorted by id.
std::shared_ptr<const Csr> build_context_graph(const DistanceMatrix& dist, double epsilon);

/// Relaxed connectivity: radius_i = max(epsilon, distance to the k-th nearest
/// labeled lot other than i), ties broken by smaller id.
PropagationGraph build_prop_graph(std::span<const ParkingLot> lots, const DistanceMatrix& dist,
                                  double epsilon, std::size_t k);

CityGraph build_city_graph(std::span<const ParkingLot> lots, const DistanceMatrix& dist,
                           double epsilon, std::size_t k);

}  // namespace share
