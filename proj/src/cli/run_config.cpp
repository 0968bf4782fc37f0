#include "share/cli/run_config.hpp"

#include <algorithm>

namespace share {

const std::vector<ConfigKey>& run_config_keys() {
  static const std::vector<ConfigKey> keys{
      {"seed", "--seed", "seed for parameter init and window shuffling"},
      {"model.variant", "--variant", "share | cagnn | cxtgnn | gru"},
      {"model.window", "--window", "input steps T"},
      {"model.horizon", "--horizon", "forecast steps tau"},
      {"model.hidden", "--hidden", "representation and GRU width d"},
      {"model.pa_bins", "--pa-bins", "PA distribution bins p"},
      {"model.latent_ratio", "--latent-ratio", "latent nodes K as a fraction of N"},
      {"model.latent_nodes", "--latent-nodes", "fixed K (0 uses the ratio)"},
      {"model.cxt_layers", "--cxt-layers", "stacked CxtConv layers"},
      {"model.epsilon_km", "--epsilon", "context graph radius in km"},
      {"model.knn", "--knn", "labeled neighbors k for the propagation graph"},
      {"model.beta", "--beta", "weight of the cross-entropy terms"},
      {"model.slope", "--slope", "LeakyReLU negative slope"},
      {"model.ce_all_steps", "--ce-all-steps", "1 averages cross-entropy over all window steps"},
      {"model.binning", "--binning", "capacity | absolute"},
      {"model.latent_scaling", "--latent-scaling", "mean | raw latent pooling"},
      {"train.lr", "--lr", "Adam learning rate"},
      {"train.epochs", "--epochs", "maximum epochs"},
      {"train.patience", "--patience", "early-stopping patience (0 disables)"},
      {"train.windows_per_epoch", "--windows-per-epoch", "training windows per epoch (0 uses all)"},
      {"train.validation_stride", "--validation-stride", "stride between validation windows"},
      {"train.restore_best", "--restore-best", "1 restores the best validation epoch"},
      {"split.train", "--train-fraction", "leading fraction of steps for training"},
      {"split.validation", "--validation-fraction", "following fraction for validation"},
      {"eval.stride", "--eval-stride", "stride between evaluation windows"},
  };
  return keys;
}

namespace {

bool known_key(std::string_view key) {
  const auto& keys = run_config_keys();
  return std::any_of(keys.begin(), keys.end(), [&](const ConfigKey& k) { return k.key == key; });
}

std::size_t count_of(const KeyValueFile& kv, std::string_view key, std::size_t fallback) {
  const long long v = kv.integer_or(key, static_cast<long long>(fallback));
  if (v < 0) throw IoError("config: '" + std::string(key) + "' must be non-negative");
  return static_cast<std::size_t>(v);
}

}  // namespace

RunConfig read_run_config(const KeyValueFile& kv) {
  for (const auto& [key, value] : kv.entries()) {
    if (!known_key(key)) throw IoError("config: unknown key '" + key + "'");
  }
  RunConfig c;
  c.model = read_model_config(kv);
  if (c.model.window < 1 || c.model.horizon < 1 || c.model.hidden < 1 || c.model.pa_bins < 1) {
    throw IoError("config: window, horizon, hidden and pa_bins must be positive");
  }
  if (!(c.model.epsilon_km > 0) || c.model.knn < 1) throw IoError("config: epsilon must be positive and knn at least 1");
  if (c.model.cxt_layers < 1) throw IoError("config: need at least one CxtConv layer");
  c.train.adam.lr = kv.number_or("train.lr", c.train.adam.lr);
  if (c.train.adam.lr < 0) throw IoError("config: learning rate must be non-negative");
  c.train.max_epochs = count_of(kv, "train.epochs", c.train.max_epochs);
  c.train.patience = count_of(kv, "train.patience", c.train.patience);
  c.train.windows_per_epoch = count_of(kv, "train.windows_per_epoch", c.train.windows_per_epoch);
  c.train.validation_stride = std::max<std::size_t>(1, count_of(kv, "train.validation_stride", c.train.validation_stride));
  c.train.restore_best = kv.integer_or("train.restore_best", 1) != 0;
  c.split.train = kv.number_or("split.train", c.split.train);
  c.split.validation = kv.number_or("split.validation", c.split.validation);
  c.eval_stride = std::max<std::size_t>(1, count_of(kv, "eval.stride", c.eval_stride));
  const long long seed = kv.integer_or("seed", static_cast<long long>(c.seed));
  if (seed < 0) throw IoError("config: seed must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  c.train.seed = c.seed;
  return c;
}

void write_run_config(KeyValueFile& kv, const RunConfig& c) {
  kv.set_integer("seed", static_cast<long long>(c.seed));
  write_model_config(kv, c.model);
  kv.set_number("train.lr", c.train.adam.lr);
  kv.set_integer("train.epochs", static_cast<long long>(c.train.max_epochs));
  kv.set_integer("train.patience", static_cast<long long>(c.train.patience));
  kv.set_integer("train.windows_per_epoch", static_cast<long long>(c.train.windows_per_epoch));
  kv.set_integer("train.validation_stride", static_cast<long long>(c.train.validation_stride));
  kv.set_integer("train.restore_best", c.train.restore_best ? 1 : 0);
  kv.set_number("split.train", c.split.train);
  kv.set_number("split.validation", c.split.validation);
  kv.set_integer("eval.stride", static_cast<long long>(c.eval_stride));
}

}  // namespace share
