#include "share/approx/approx.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace share {

std::size_t Binning::bin(int pa, int capacity) const {
  if (bins == 0) throw Error("binning: need at least one bin");
  if (capacity < 1) throw Error("binning: capacity must be positive");
  if (pa < 0 || pa > capacity) {
    throw Error("PA outside capacity: " + std::to_string(pa) + " not in [0, " +
                std::to_string(capacity) + "]");
  }
  const int scale = rule == BinningRule::kCapacityRelative ? capacity : absolute_scale;
  if (scale < 1) throw Error("binning: absolute scale must be positive");
  const auto raw = static_cast<std::size_t>(static_cast<long long>(bins) * pa / scale);
  return std::min(raw, bins - 1);
}

std::vector<double> discretize_pa(int pa, int capacity, const Binning& binning) {
  std::vector<double> out(binning.bins, 0.0);
  out[binning.bin(pa, capacity)] = 1.0;
  return out;
}

Var propconv(Var attention_weights, Var features, Var observed,
             std::shared_ptr<const Csr> aggregation) {
  for (std::size_t r = 0; r < aggregation->rows(); ++r) {
    if (aggregation->row_end(r) == aggregation->row_begin(r)) {
      throw Error("propconv: lot " + std::to_string(r) + " has no labeled neighbor");
    }
  }
  const Var projected = matmul(features, attention_weights);
  const Var alpha = segment_softmax(edge_dot(projected, projected, aggregation), aggregation);
  return edge_aggregate(alpha, observed, aggregation);
}

Var temporal_pa_distribution(Var temporal_weights, Var h_prev) {
  return row_softmax(matmul(h_prev, temporal_weights));
}

Var entropy(Var distributions) {
  return scale(row_sum(mul(distributions, log(distributions))), -1.0);
}

Var fuse(Var spatial, Var temporal) {
  if (spatial.shape() != temporal.shape() || spatial.value().rank() != 2) {
    throw ShapeError("fuse: shape mismatch " + shape_to_string(spatial.shape()) + " vs " +
                     shape_to_string(temporal.shape()));
  }
  Tape& tape = spatial.tape();
  const Var spatial_share = sigmoid(sub(entropy(temporal), entropy(spatial)));
  const Var ones = tape.constant(Tensor(Shape{spatial.value().rows(), 1}, 1.0));
  const Var temporal_share = sub(ones, spatial_share);
  return add(mul(spatial, spatial_share), mul(temporal, temporal_share));
}

double entropy(std::span<const double> dist) {
  double h = 0.0;
  for (double v : dist) h -= v * std::log(std::max(v, 1e-12));
  return h;
}

std::vector<double> fuse(std::span<const double> spatial, std::span<const double> temporal) {
  if (spatial.size() != temporal.size() || spatial.empty()) {
    throw ShapeError("fuse: length mismatch " + std::to_string(spatial.size()) + " vs " +
                     std::to_string(temporal.size()));
  }
  Tape tape;
  const std::size_t p = spatial.size();
  const Var s = tape.constant(Tensor(Shape{1, p}, std::vector<double>(spatial.begin(), spatial.end())));
  const Var t = tape.constant(Tensor(Shape{1, p}, std::vector<double>(temporal.begin(), temporal.end())));
  return fuse(s, t).value().data();
}

}  // namespace share
