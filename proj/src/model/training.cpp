#include "share/model/training.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "share/numerics/rng.hpp"

namespace share {

ErrorStats EvalReport::overall(LotClass c) const {
  ErrorStats total;
  for (const auto& h : horizons) total.merge(h[static_cast<std::size_t>(c)]);
  return total;
}

namespace {

void score(const Tensor& normalized, const WindowSample& sample, const ModelContext& ctx,
           std::vector<std::array<ErrorStats, kNumLotClasses>>& horizons) {
  for (std::size_t j = 0; j < sample.targets.size(); ++j) {
    for (std::size_t i = 0; i < ctx.num_lots(); ++i) {
      const double predicted = normalized.at(i, j) * ctx.capacity[i];
      const double truth = sample.targets[j][i];
      const auto cls = static_cast<std::size_t>(sample.target_mask[i] ? LotClass::kLabeled : LotClass::kUnlabeled);
      horizons[j][cls].add(predicted, truth);
      horizons[j][static_cast<std::size_t>(LotClass::kAll)].add(predicted, truth);
    }
  }
}

void check_finite(const LossValues& l, std::size_t epoch, std::size_t start) {
  auto fail = [&](const char* term, double v) {
    throw Error(std::string("training diverged: ") + term + " = " + std::to_string(v) + " at epoch " +
                std::to_string(epoch) + ", window start " + std::to_string(start));
  };
  if (!std::isfinite(l.o1)) fail("O1", l.o1);
  if (!std::isfinite(l.o2)) fail("O2", l.o2);
  if (!std::isfinite(l.o3)) fail("O3", l.o3);
  if (!std::isfinite(l.total)) fail("O", l.total);
}

}  // namespace

EvalReport evaluate(const ModelParams& params, const Dataset& data, const Split& split,
                    const ModelContext& ctx, std::size_t stride) {
  if (split.starts.empty()) throw Error("evaluate: empty split");
  if (stride < 1) throw Error("evaluate: stride must be positive");
  EvalReport report;
  report.horizons.resize(params.config().horizon);
  for (std::size_t w = 0; w < split.starts.size(); w += stride) {
    const WindowSample sample = data.sample(split.starts[w]);
    Tape tape;
    const BoundModel model = bind(tape, params, false);
    const ForwardResult fwd = forward_window(tape, model, params, sample, ctx, params.config().variant);
    const Losses l = compute_losses(tape, fwd, sample, ctx, params.config().beta, params.config().ce_all_steps);
    report.losses.o1 += l.o1.value().item();
    report.losses.o2 += l.o2.value().item();
    report.losses.o3 += l.o3.value().item();
    report.losses.total += l.total.value().item();
    score(fwd.predictions.value(), sample, ctx, report.horizons);
    ++report.windows;
  }
  const auto n = static_cast<double>(report.windows);
  report.losses.o1 /= n;
  report.losses.o2 /= n;
  report.losses.o3 /= n;
  report.losses.total /= n;
  return report;
}

TrainResult train(ModelParams& params, const Dataset& data, const ModelContext& ctx,
                  const TrainConfig& config, const std::function<void(const EpochRecord&)>& on_epoch) {
  const Split& split = data.train();
  if (split.starts.empty()) throw Error("train: empty training split");
  if (config.max_epochs < 1) throw Error("train: need at least one epoch");
  const bool validate = !data.validation().starts.empty();

  AdamState state;
  std::vector<Tensor*> pointers = params.pointers();
  TrainResult result;
  result.best_score = std::numeric_limits<double>::infinity();
  std::vector<NamedTensor> best = params.tensors();
  std::size_t since_best = 0;

  std::vector<std::size_t> order(split.starts.size());
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    SplitMix64 rng = SplitMix64::derive(config.seed, epoch);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(i - 1)))]);
    }
    const std::size_t steps = config.windows_per_epoch ? std::min(config.windows_per_epoch, order.size()) : order.size();

    EpochRecord record;
    record.epoch = epoch;
    std::vector<std::array<ErrorStats, kNumLotClasses>> seen(params.config().horizon);
    for (std::size_t s = 0; s < steps; ++s) {
      const std::size_t start = split.starts[order[s]];
      const WindowSample sample = data.sample(start);
      GradientResult g = loss_and_gradients(params, sample, ctx);
      check_finite(g.losses, epoch, start);
      record.train.o1 += g.losses.o1;
      record.train.o2 += g.losses.o2;
      record.train.o3 += g.losses.o3;
      record.train.total += g.losses.total;
      score(g.predictions, sample, ctx, seen);
      adam_step(pointers, g.grads, state, config.adam);
    }
    const auto n = static_cast<double>(steps);
    record.train.o1 /= n;
    record.train.o2 /= n;
    record.train.o3 /= n;
    record.train.total /= n;
    for (const auto& h : seen) record.train_labeled.merge(h[static_cast<std::size_t>(LotClass::kLabeled)]);

    double score_value = record.train.o1;
    if (validate) {
      record.validation = evaluate(params, data, data.validation(), ctx, config.validation_stride);
      record.has_validation = true;
      score_value = record.validation.losses.o1;
    }
    result.history.push_back(record);
    if (on_epoch) on_epoch(record);

    if (score_value < result.best_score) {
      result.best_score = score_value;
      result.best_epoch = epoch;
      best = params.tensors();
      since_best = 0;
    } else if (config.patience && ++since_best >= config.patience) {
      result.stopped_early = true;
      break;
    }
  }
  if (config.restore_best) params.tensors() = std::move(best);
  return result;
}

}  // namespace share
