#include "share/spatial/spatial.hpp"

#include <string>

namespace share {

namespace {

void require_nonempty_rows(const Csr& graph, const char* what) {
  for (std::size_t r = 0; r < graph.rows(); ++r) {
    if (graph.row_end(r) == graph.row_begin(r)) {
      throw Error(std::string(what) + ": lot " + std::to_string(r) + " has an empty neighborhood");
    }
  }
}

}  // namespace

Var attention_proximity(Var features, Var attention_weights, std::shared_ptr<const Csr> graph) {
  require_nonempty_rows(*graph, "attention");
  const Var projected = matmul(features, attention_weights);
  const Var logits = edge_dot(projected, projected, graph);
  return segment_softmax(logits, graph);
}

Var cxtconv_layer(const CxtConvWeights& layer, Var features, std::shared_ptr<const Csr> adjacency,
                  double slope) {
  const Var alpha = attention_proximity(features, layer.attention, adjacency);
  const Var transformed = matmul(features, layer.transform);
  return leaky_relu(edge_aggregate(alpha, transformed, adjacency), slope);
}

Var soft_assignment(Var assignment_weights, Var features) {
  return row_softmax(matmul(features, assignment_weights));
}

LatentPool latent_pool(Var assignment, Var features, std::shared_ptr<const Csr> adjacency) {
  const Tensor& s = assignment.value();
  if (s.rank() != 2 || s.dim(0) != adjacency->rows() || s.dim(0) != features.value().rows()) {
    throw ShapeError("latent_pool: assignment " + shape_to_string(s.shape()) + " vs features " +
                     shape_to_string(features.shape()) + " over " +
                     std::to_string(adjacency->rows()) + " lots");
  }
  Tape& tape = assignment.tape();
  const Var st = transpose(assignment);
  const Var ones = tape.constant(Tensor(Shape{adjacency->nnz()}, 1.0));
  const Var as = edge_aggregate(ones, assignment, adjacency);  // A S
  return LatentPool{matmul(st, features), matmul(st, as)};
}

Var scconv_unpool(Var latent_weights, const LatentPool& pool, Var assignment, double slope,
                  LatentScaling scaling) {
  Var features = pool.features;
  Var proximity = pool.proximity;
  if (scaling == LatentScaling::kMean) {
    features = mul(features, reciprocal(row_sum(transpose(assignment))));
    proximity = mul(proximity, reciprocal(row_sum(proximity)));
  }
  const Var messages = matmul(features, latent_weights);
  const Var latent = leaky_relu(matmul(proximity, messages), slope);
  return matmul(assignment, latent);
}

}  // namespace share
