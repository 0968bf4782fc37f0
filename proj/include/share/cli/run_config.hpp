#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "share/data/windows.hpp"
#include "share/io/files.hpp"
#include "share/model/model.hpp"
#include "share/model/training.hpp"

namespace share {

/// Everything a train/evaluate/ablation run needs besides file paths.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  SplitFractions split;
  std::size_t eval_stride = 1;
  std::uint64_t seed = 1;  // parameter init and window shuffling
};

/// A config key that can also be set with a command-line flag.
struct ConfigKey {
  std::string_view key;
  std::string_view flag;
  std::string_view help;
};

/// Keys understood by RunConfig, with their flags.
const std::vector<ConfigKey>& run_config_keys();

/// Missing keys keep their defaults; unknown keys are rejected.
RunConfig read_run_config(const KeyValueFile& kv);
void write_run_config(KeyValueFile& kv, const RunConfig& config);

}  // namespace share
