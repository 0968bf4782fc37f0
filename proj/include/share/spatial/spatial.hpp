#pragma once

#include <memory>

#include "share/numerics/tape.hpp"

namespace share {

/// Learnable weights of one contextual graph convolution layer, bound to a tape.
struct CxtConvWeights {
  Var attention;  // W_a: d_in x d_att
  Var transform;  // W_c: d_in x d_out
};

/// Dot-product attention restricted to graph edges, softmax-normalized per row.
///
/// Returns one weight per CSR edge: alpha_ij = softmax_j (W_a x_i . W_a x_j).
Var attention_proximity(Var features, Var attention_weights, std::shared_ptr<const Csr> graph);

/// x'_i = LeakyReLU(sum_j alpha_ij W_c x_j) over the context neighborhood of i.
Var cxtconv_layer(const CxtConvWeights& layer, Var features, std::shared_ptr<const Csr> adjacency,
                  double slope = 0.2);

/// Row-stochastic assignment of lots to latent nodes: S = softmax(X W_s).
Var soft_assignment(Var assignment_weights, Var features);

struct LatentPool {
  Var features;   // X^s = S^T X, K x d
  Var proximity;  // alpha^s = S^T A S, K x K, unnormalized
};

/// Pools lot features into latent nodes; `adjacency` is the binary context graph.
LatentPool latent_pool(Var assignment, Var features, std::shared_ptr<const Csr> adjacency);

enum class LatentScaling {
  kRaw,   // alpha^s and X^s used exactly as pooled
  kMean,  // cluster-mean features and row-stochastic alpha^s
};

/// Latent convolution over the complete latent graph followed by unpooling:
/// X^s' = LeakyReLU(alpha^s X^s W_l), x^sc = S X^s'.
///
/// Raw pooled sums grow with the number of lots and context edges per latent
/// node; kMean divides X^s by each latent node's assignment mass and alpha^s by
/// its row sums, which keeps x^sc on the scale of the lot features.
Var scconv_unpool(Var latent_weights, const LatentPool& pool, Var assignment, double slope = 0.2,
                  LatentScaling scaling = LatentScaling::kRaw);

}  // namespace share
