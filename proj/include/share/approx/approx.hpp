#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "share/numerics/tape.hpp"

namespace share {

enum class BinningRule {
  kCapacityRelative,  // bin = floor(p * y / capacity)
  kAbsolute,          // bin = floor(p * y / scale) for one city-wide scale
};

struct Binning {
  std::size_t bins = 50;
  BinningRule rule = BinningRule::kCapacityRelative;
  int absolute_scale = 0;  // only for kAbsolute

  std::size_t bin(int pa, int capacity) const;
};

/// One-hot PA distribution of length `binning.bins`.
std::vector<double> discretize_pa(int pa, int capacity, const Binning& binning);

/// x^sp_i = sum_j alpha_ij y_j over the labeled neighbors of i, where alpha is
/// dot-product attention on `features W_a` normalized over that neighbor set.
/// `observed` holds one-hot rows for labeled lots (other rows are never read).
/// No activation is applied, so every row is a convex mix of one-hots.
Var propconv(Var attention_weights, Var features, Var observed,
             std::shared_ptr<const Csr> aggregation);

/// softmax(h_prev W_tp), N x p.
Var temporal_pa_distribution(Var temporal_weights, Var h_prev);

/// Row entropies -sum_j x_j log x_j (natural log, 0 log 0 = 0), shape N x 1.
Var entropy(Var distributions);

/// Entropy-weighted fusion with weights exp(-H). Since
/// exp(-H_s) / (exp(-H_s) + exp(-H_t)) = sigmoid(H_t - H_s), the spatial share is
/// evaluated as a sigmoid, which never overflows.
Var fuse(Var spatial, Var temporal);

// Tape-free conveniences on single distributions.
double entropy(std::span<const double> dist);
std::vector<double> fuse(std::span<const double> spatial, std::span<const double> temporal);

}  // namespace share
