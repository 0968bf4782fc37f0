#include "share/data/windows.hpp"

#include <cmath>
#include <string>

namespace share {

std::size_t window_count(std::size_t length, std::size_t window, std::size_t horizon) {
  return length + 1 > window + horizon ? length + 1 - window - horizon : 0;
}

namespace {

Split make_split(std::size_t begin, std::size_t end, std::size_t window, std::size_t horizon) {
  Split s{begin, end, {}};
  const std::size_t count = window_count(end - begin, window, horizon);
  s.starts.reserve(count);
  for (std::size_t i = 0; i < count; ++i) s.starts.push_back(begin + i);
  return s;
}

std::size_t boundary(double fraction, std::size_t length) {
  return std::min(length, static_cast<std::size_t>(std::floor(fraction * static_cast<double>(length) + 1e-9)));
}

}  // namespace

Dataset::Dataset(std::shared_ptr<const City> city, std::shared_ptr<const Observations> obs,
                 std::size_t window, std::size_t horizon, SplitFractions fractions,
                 std::size_t steps_per_day)
    : city_(std::move(city)), obs_(std::move(obs)), window_(window), horizon_(horizon) {
  if (window < 1 || horizon < 1) throw Error("windows: T and tau must be positive");
  if (fractions.train < 0 || fractions.validation < 0 || fractions.train + fractions.validation > 1 + 1e-12) {
    throw Error("windows: split fractions must be non-negative and sum to at most 1");
  }
  const std::size_t length = obs_->num_steps();
  if (length < window + horizon) {
    throw Error("windows: series too short (" + std::to_string(length) + " steps) for T=" +
                std::to_string(window) + ", tau=" + std::to_string(horizon));
  }
  for (const auto& row : obs_->pa) {
    if (row.size() != city_->size()) throw Error("windows: series width does not match the city");
  }
  labeled_ = city_->labeled_ids();
  const std::size_t train_end = boundary(fractions.train, length);
  const std::size_t val_end = boundary(fractions.train + fractions.validation, length);
  train_ = make_split(0, train_end, window, horizon);
  validation_ = make_split(train_end, val_end, window, horizon);
  test_ = make_split(val_end, length, window, horizon);

  features_.reserve(length);
  for (std::size_t t = 0; t < length; ++t) features_.push_back(step_features(*city_, *obs_, t, steps_per_day));
}

WindowSample Dataset::sample(std::size_t start) const {
  if (start + window_ + horizon_ > obs_->num_steps()) throw Error("windows: start out of range");
  WindowSample w;
  w.start = start;
  w.features.assign(features_.begin() + static_cast<std::ptrdiff_t>(start),
                    features_.begin() + static_cast<std::ptrdiff_t>(start + window_));
  w.observed_pa.reserve(window_);
  for (std::size_t t = start; t < start + window_; ++t) {
    std::vector<int> row;
    row.reserve(labeled_.size());
    for (std::size_t id : labeled_) row.push_back(obs_->pa[t][id]);
    w.observed_pa.push_back(std::move(row));
  }
  for (std::size_t t = start + window_; t < start + window_ + horizon_; ++t) w.targets.push_back(obs_->pa[t]);
  w.target_mask.resize(city_->size());
  for (const auto& lot : city_->lots) w.target_mask[lot.id] = lot.labeled;
  return w;
}

Dataset make_windows(std::shared_ptr<const City> city, std::shared_ptr<const Observations> obs,
                     std::size_t window, std::size_t horizon, SplitFractions fractions,
                     std::size_t steps_per_day) {
  return Dataset(std::move(city), std::move(obs), window, horizon, fractions, steps_per_day);
}

}  // namespace share
