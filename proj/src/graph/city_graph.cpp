#include "share/graph/city_graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <limits>
#include <queue>
#include <string>

#include "share/numerics/rng.hpp"

namespace share {

namespace {

// Guards the <= comparisons against last-ulp noise in summed distances.
constexpr double kDistanceSlack = 1e-12;

std::size_t nearest_index(double coord, double origin, double spacing, std::size_t count) {
  // Round half down so a lot midway between two nodes attaches to the lower one.
  const double v = (coord - origin) / spacing;
  const double idx = std::ceil(v - 0.5);
  return static_cast<std::size_t>(std::clamp(idx, 0.0, static_cast<double>(count - 1)));
}

}  // namespace

void validate_lots(std::span<const ParkingLot> lots) {
  for (std::size_t i = 0; i < lots.size(); ++i) {
    if (lots[i].id != i) throw Error("lots: ids must be dense 0..N-1, found " + std::to_string(lots[i].id) + " at " + std::to_string(i));
    if (lots[i].capacity < 1) throw Error("lots: capacity must be at least 1 for lot " + std::to_string(i));
  }
}

DistanceMatrix::DistanceMatrix(std::size_t n, std::vector<double> values)
    : n_(n), d_(std::move(values)) {
  if (d_.size() != n * n) throw ShapeError("distance matrix: expected " + std::to_string(n * n) + " entries");
}

RoadNetwork::RoadNetwork(BoundingBox box, double spacing, std::span<const Point> lots,
                         double blocked_fraction, std::uint64_t seed)
    : box_(box), spacing_(spacing) {
  if (!(box.width() > 0) || !(box.height() > 0)) throw Error("road network: degenerate bounding box");
  if (!(spacing > 0)) throw Error("road network: grid spacing must be positive");
  if (blocked_fraction < 0 || blocked_fraction >= 1) throw Error("road network: blocked fraction must be in [0, 1)");
  nx_ = static_cast<std::size_t>(std::ceil(box.width() / spacing - 1e-9)) + 1;
  ny_ = static_cast<std::size_t>(std::ceil(box.height() / spacing - 1e-9)) + 1;

  blocked_.assign(nx_ * ny_ * 2, false);
  if (blocked_fraction > 0) {
    SplitMix64 rng = SplitMix64::derive(seed, 0x524f4144);  // "ROAD"
    // Edges of a random spanning tree stay open so the lattice remains connected.
    std::vector<std::size_t> edges;
    for (std::size_t node = 0; node < nx_ * ny_; ++node) {
      if (node % nx_ + 1 < nx_) edges.push_back(node * 2);
      if (node / nx_ + 1 < ny_) edges.push_back(node * 2 + 1);
    }
    for (std::size_t i = edges.size(); i > 1; --i) {
      std::swap(edges[i - 1], edges[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(i) - 1))]);
    }
    std::vector<std::size_t> parent(nx_ * ny_);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto root = [&](std::size_t v) {
      while (parent[v] != v) v = parent[v] = parent[parent[v]];
      return v;
    };
    std::vector<bool> in_tree(nx_ * ny_ * 2, false);
    for (std::size_t e : edges) {
      const std::size_t a = e / 2;
      const std::size_t b = e % 2 == 0 ? a + 1 : a + nx_;
      const std::size_t ra = root(a), rb = root(b);
      if (ra != rb) {
        parent[ra] = rb;
        in_tree[e] = true;
      }
    }
    std::sort(edges.begin(), edges.end());
    for (std::size_t e : edges) {
      if (!in_tree[e] && rng.uniform() < blocked_fraction) {
        blocked_[e] = true;
        ++blocked_count_;
      }
    }
  }

  // Connectivity check over the lattice.
  {
    std::vector<bool> seen(nx_ * ny_, false);
    std::deque<std::size_t> queue{0};
    seen[0] = true;
    std::size_t reached = 1;
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      const std::size_t ux = u % nx_;
      const std::size_t uy = u / nx_;
      auto visit = [&](std::size_t v, bool open) {
        if (open && !seen[v]) {
          seen[v] = true;
          ++reached;
          queue.push_back(v);
        }
      };
      if (ux + 1 < nx_) visit(u + 1, !blocked_[u * 2]);
      if (ux > 0) visit(u - 1, !blocked_[(u - 1) * 2]);
      if (uy + 1 < ny_) visit(u + nx_, !blocked_[u * 2 + 1]);
      if (uy > 0) visit(u - nx_, !blocked_[(u - nx_) * 2 + 1]);
    }
    if (reached != nx_ * ny_) throw Error("road network: lattice is disconnected");
  }

  attach_.reserve(lots.size());
  offset_.reserve(lots.size());
  for (const Point& p : lots) {
    if (!box.contains(p)) throw Error("road network: lot outside the bounding box");
    const std::size_t ix = nearest_index(p.x, box.min_x, spacing, nx_);
    const std::size_t iy = nearest_index(p.y, box.min_y, spacing, ny_);
    const double dx = p.x - (box.min_x + static_cast<double>(ix) * spacing);
    const double dy = p.y - (box.min_y + static_cast<double>(iy) * spacing);
    attach_.push_back(iy * nx_ + ix);
    offset_.push_back(std::hypot(dx, dy));
  }

  const std::size_t n = lots.size();
  distances_ = DistanceMatrix(n);
  std::vector<std::vector<double>> by_node(nx_ * ny_);
  for (std::size_t i = 0; i < n; ++i) {
    auto& sp = by_node[attach_[i]];
    if (sp.empty()) sp = shortest_paths(attach_[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      distances_.set(i, j, offset_[i] + sp[attach_[j]] + offset_[j]);
    }
  }
}

std::vector<double> RoadNetwork::shortest_paths(std::size_t source) const {
  std::vector<double> dist(nx_ * ny_, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    const auto [du, u] = heap.top();
    heap.pop();
    if (du > dist[u]) continue;
    const std::size_t ux = u % nx_;
    const std::size_t uy = u / nx_;
    auto relax = [&](std::size_t v, bool open) {
      if (open && du + spacing_ < dist[v]) {
        dist[v] = du + spacing_;
        heap.emplace(dist[v], v);
      }
    };
    if (ux + 1 < nx_) relax(u + 1, !blocked_[u * 2]);
    if (ux > 0) relax(u - 1, !blocked_[(u - 1) * 2]);
    if (uy + 1 < ny_) relax(u + nx_, !blocked_[u * 2 + 1]);
    if (uy > 0) relax(u - nx_, !blocked_[(u - nx_) * 2 + 1]);
  }
  return dist;
}

std::shared_ptr<const Csr> build_context_graph(const DistanceMatrix& dist, double epsilon) {
  if (!(epsilon > 0)) throw Error("context graph: epsilon must be positive");
  const std::size_t n = dist.size();
  std::vector<std::vector<std::size_t>> lists(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || dist(i, j) <= epsilon + kDistanceSlack) lists[i].push_back(j);
    }
  }
  return std::make_shared<const Csr>(Csr::from_lists(lists, n));
}

PropagationGraph build_prop_graph(std::span<const ParkingLot> lots, const DistanceMatrix& dist,
                                  double epsilon, std::size_t k) {
  if (!(epsilon > 0)) throw Error("propagation graph: epsilon must be positive");
  if (k < 1) throw Error("propagation graph: k must be at least 1");
  const std::size_t n = lots.size();
  if (dist.size() != n) throw ShapeError("propagation graph: distance table does not match lots");
  std::vector<std::size_t> labeled;
  for (const auto& lot : lots) {
    if (lot.labeled) labeled.push_back(lot.id);
  }
  if (labeled.empty()) throw Error("no labeled lots; propagation undefined");

  PropagationGraph out;
  out.radius.resize(n);
  std::vector<std::vector<std::size_t>> all(n);
  std::vector<std::vector<std::size_t>> agg(n);
  std::vector<std::size_t> others;
  for (std::size_t i = 0; i < n; ++i) {
    others.clear();
    for (std::size_t j : labeled) {
      if (j != i) others.push_back(j);
    }
    double radius = epsilon;
    if (!others.empty()) {
      const std::size_t kth = std::min(k, others.size()) - 1;
      std::nth_element(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(kth), others.end(),
                       [&](std::size_t a, std::size_t b) {
                         return dist(i, a) != dist(i, b) ? dist(i, a) < dist(i, b) : a < b;
                       });
      radius = std::max(epsilon, dist(i, others[kth]));
    }
    out.radius[i] = radius;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || dist(i, j) > radius + kDistanceSlack) continue;
      all[i].push_back(j);
      if (lots[j].labeled) agg[i].push_back(j);
    }
  }
  out.neighbors = std::make_shared<const Csr>(Csr::from_lists(all, n));
  out.aggregation = std::make_shared<const Csr>(Csr::from_lists(agg, n));
  return out;
}

CityGraph build_city_graph(std::span<const ParkingLot> lots, const DistanceMatrix& dist,
                           double epsilon, std::size_t k) {
  validate_lots(lots);
  CityGraph g;
  g.epsilon = epsilon;
  g.k = k;
  g.context = build_context_graph(dist, epsilon);
  g.propagation = build_prop_graph(lots, dist, epsilon, k);
  return g;
}

}  // namespace share
