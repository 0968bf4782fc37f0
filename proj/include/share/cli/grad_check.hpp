#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "share/model/model.hpp"

namespace share {

struct GradCheckOptions {
  std::size_t num_lots = 6;
  std::size_t window = 4;
  std::size_t hidden = 8;
  std::size_t latent_nodes = 2;
  std::size_t pa_bins = 8;
  Variant variant = Variant::kShare;
  double step = 1e-4;  // round-off dominates below, LeakyReLU kinks above
  std::uint64_t seed = 3;
};

struct GroupError {
  std::string group;  // "cxtconv", "scconv", "propconv", "gru", "output", "temporal_pa"
  double max_relative = 0.0;
  double max_absolute = 0.0;
  std::size_t scalars = 0;
};

struct GradCheckReport {
  std::vector<GroupError> groups;
  LossValues losses;
  double worst() const;
};

/// Compares reverse-mode gradients of the full objective with central
/// differences on a small generated city, entry by entry.
GradCheckReport run_grad_check(const GradCheckOptions& options);

}  // namespace share
