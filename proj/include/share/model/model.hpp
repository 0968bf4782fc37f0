#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "share/approx/approx.hpp"
#include "share/data/windows.hpp"
#include "share/graph/city_graph.hpp"
#include "share/numerics/tape.hpp"
#include "share/spatial/spatial.hpp"
#include "share/temporal/temporal.hpp"

namespace share {

enum class Variant {
  kShare,    // full model
  kCagnn,    // no soft-clustering block
  kCxtgnn,   // no soft-clustering block, no PA approximation
  kGruOnly,  // recurrent module on raw features
};

std::string_view variant_name(Variant v);
Variant variant_from_name(std::string_view name);

struct ModelConfig {
  Variant variant = Variant::kShare;
  std::size_t window = 12;   // T
  std::size_t horizon = 3;   // tau
  std::size_t hidden = 32;   // width of x^c, x^sc, attention space and GRU state
  std::size_t pa_bins = 50;  // p
  double latent_ratio = 0.1;
  std::size_t latent_nodes = 0;  // overrides latent_ratio when non-zero
  std::size_t cxt_layers = 2;
  double epsilon_km = 1.0;
  std::size_t knn = 10;
  double beta = 0.5;
  double slope = 0.2;
  /// Average the cross-entropy terms over every window step instead of the last.
  bool ce_all_steps = false;
  BinningRule binning = BinningRule::kCapacityRelative;
  LatentScaling latent_scaling = LatentScaling::kMean;

  bool uses_pa() const { return variant == Variant::kShare || variant == Variant::kCagnn; }
  bool uses_scconv() const { return variant == Variant::kShare; }
  bool uses_cxtconv() const { return variant != Variant::kGruOnly; }
};

/// K = max(1, round(ratio * N)) unless overridden.
std::size_t latent_count(const ModelConfig& config, std::size_t num_lots);

struct NamedTensor {
  std::string name;
  Tensor value;
};

/// Every learnable tensor of one model, in a fixed registration order.
class ModelParams {
 public:
  /// Glorot-uniform weights, zero biases.
  static ModelParams init(const ModelConfig& config, std::size_t num_lots,
                          std::size_t num_features, std::uint64_t seed);
  /// Empty tensors with the right shapes, for loading checkpoints.
  static ModelParams shaped(const ModelConfig& config, std::size_t num_lots,
                            std::size_t num_features);

  const ModelConfig& config() const { return config_; }
  std::size_t num_lots() const { return num_lots_; }
  std::size_t num_features() const { return num_features_; }
  std::size_t latent_nodes() const { return latent_; }
  std::size_t gru_input_width() const;

  std::vector<NamedTensor>& tensors() { return tensors_; }
  const std::vector<NamedTensor>& tensors() const { return tensors_; }
  const Tensor& get(std::string_view name) const;
  Tensor& get(std::string_view name);
  std::vector<Tensor*> pointers();
  std::size_t num_scalars() const;

 private:
  void add(std::string name, Shape shape);

  ModelConfig config_;
  std::size_t num_lots_ = 0;
  std::size_t num_features_ = 0;
  std::size_t latent_ = 0;
  std::vector<NamedTensor> tensors_;
};

/// Parameter group of a tensor name, e.g. "gru" for "gru.W_r".
std::string param_group(std::string_view name);

/// Parameters registered on a tape.
struct BoundModel {
  std::vector<CxtConvWeights> cxt;
  Var assignment;      // W_s
  Var latent;          // W_l
  Var prop_attention;  // PropConv W_a
  GruWeights gru;
  Var output;          // W_o
  Var temporal_pa;     // W_tp
  std::vector<Var> all;
};

BoundModel bind(Tape& tape, const ModelParams& params, bool requires_grad);

/// City-level constants shared by every window.
struct ModelContext {
  CityGraph graph;
  std::vector<int> capacity;
  std::shared_ptr<const std::vector<std::size_t>> labeled;  // ids of P_l
  Binning binning;
  Tensor unlabeled_mask;  // N x 1, 1 for lots without sensors

  std::size_t num_lots() const { return capacity.size(); }
};

ModelContext make_context(const City& city, const ModelConfig& config);

struct ForwardResult {
  Var predictions;               // N x tau, normalized to (0, 1)
  std::vector<Var> spatial_pa;   // per step, N x p (empty for variants without PA)
  std::vector<Var> temporal_pa;  // per step, N x p
};

ForwardResult forward_window(Tape& tape, const BoundModel& model, const ModelParams& params,
                             const WindowSample& sample, const ModelContext& ctx, Variant variant);

struct Losses {
  Var o1;
  Var o2;
  Var o3;
  Var total;
};

Losses compute_losses(Tape& tape, const ForwardResult& forward, const WindowSample& sample,
                      const ModelContext& ctx, double beta, bool ce_all_steps);

struct LossValues {
  double o1 = 0.0;
  double o2 = 0.0;
  double o3 = 0.0;
  double total = 0.0;
};

struct GradientResult {
  LossValues losses;
  std::vector<Tensor> grads;  // aligned with params.tensors()
  Tensor predictions;         // N x tau, normalized
};

/// Forward + backward on one window.
GradientResult loss_and_gradients(const ModelParams& params, const WindowSample& sample,
                                  const ModelContext& ctx);
/// Forward only.
LossValues loss_value(const ModelParams& params, const WindowSample& sample, const ModelContext& ctx);

/// Absolute PA forecasts (normalized output times capacity), N x tau.
Tensor predict(const ModelParams& params, const WindowSample& sample, const ModelContext& ctx);

}  // namespace share
