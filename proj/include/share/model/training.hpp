#pragma once

#include <cstddef>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "share/data/windows.hpp"
#include "share/model/model.hpp"
#include "share/numerics/optim.hpp"

namespace share {

struct ErrorStats {
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  std::size_t count = 0;

  void add(double predicted, double truth) {
    const double e = predicted - truth;
    abs_sum += std::abs(e);
    sq_sum += e * e;
    ++count;
  }
  void merge(const ErrorStats& other) {
    abs_sum += other.abs_sum;
    sq_sum += other.sq_sum;
    count += other.count;
  }
  double mae() const { return count ? abs_sum / static_cast<double>(count) : 0.0; }
  double rmse() const { return count ? std::sqrt(sq_sum / static_cast<double>(count)) : 0.0; }
};

enum class LotClass { kLabeled = 0, kUnlabeled = 1, kAll = 2 };
inline constexpr std::size_t kNumLotClasses = 3;

/// Absolute-count errors per horizon and lot class, plus mean losses.
struct EvalReport {
  std::vector<std::array<ErrorStats, kNumLotClasses>> horizons;
  LossValues losses;
  std::size_t windows = 0;

  const ErrorStats& at(std::size_t horizon, LotClass c) const {
    return horizons[horizon][static_cast<std::size_t>(c)];
  }
  /// Pooled over all horizons.
  ErrorStats overall(LotClass c) const;
};

/// Scores denormalized predictions against the full ground truth of every lot.
/// Windows are taken every `stride` starts.
EvalReport evaluate(const ModelParams& params, const Dataset& data, const Split& split,
                    const ModelContext& ctx, std::size_t stride = 1);

struct TrainConfig {
  AdamConfig adam;
  std::size_t max_epochs = 200;
  std::size_t patience = 10;           // 0 disables early stopping
  std::size_t windows_per_epoch = 0;   // 0: every training window
  std::size_t validation_stride = 1;
  bool restore_best = true;
  std::uint64_t seed = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  LossValues train;
  ErrorStats train_labeled;  // pooled over horizons, on the windows stepped this epoch
  EvalReport validation;
  bool has_validation = false;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_score = 0.0;
  bool stopped_early = false;
};

/// Semi-supervised training: one window per Adam step, shuffled per epoch, early
/// stopping on validation O1 (best parameters restored). Deterministic in `seed`.
TrainResult train(ModelParams& params, const Dataset& data, const ModelContext& ctx,
                  const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

}  // namespace share
