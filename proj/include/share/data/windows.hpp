#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "share/data/synthetic.hpp"
#include "share/numerics/tensor.hpp"

namespace share {

/// One training/evaluation sample: T input steps and the following tau targets.
struct WindowSample {
  std::size_t start = 0;
  std::vector<Tensor> features;               // T tensors of N x M
  std::vector<std::vector<int>> observed_pa;  // T x |P_l|, ordered by labeled id
  std::vector<std::vector<int>> targets;      // tau x N ground truth
  std::vector<bool> target_mask;              // N, true where the target may be used in the loss
};

struct SplitFractions {
  double train = 0.6;
  double validation = 0.2;  // test gets the remainder
};

struct Split {
  std::size_t begin = 0;  // first step
  std::size_t end = 0;    // one past the last step
  std::vector<std::size_t> starts;
};

/// Number of stride-1 windows fitting in `length` steps.
std::size_t window_count(std::size_t length, std::size_t window, std::size_t horizon);

/// Chronologically split series with stride-1 windows that never cross a
/// split boundary. Feature matrices are computed once per step and shared.
class Dataset {
 public:
  Dataset(std::shared_ptr<const City> city, std::shared_ptr<const Observations> obs,
          std::size_t window, std::size_t horizon, SplitFractions fractions,
          std::size_t steps_per_day);

  const City& city() const { return *city_; }
  const Observations& observations() const { return *obs_; }
  std::size_t window() const { return window_; }
  std::size_t horizon() const { return horizon_; }

  const Split& train() const { return train_; }
  const Split& validation() const { return validation_; }
  const Split& test() const { return test_; }

  WindowSample sample(std::size_t start) const;

 private:
  std::shared_ptr<const City> city_;
  std::shared_ptr<const Observations> obs_;
  std::size_t window_;
  std::size_t horizon_;
  std::vector<std::size_t> labeled_;
  std::vector<Tensor> features_;
  Split train_;
  Split validation_;
  Split test_;
};

Dataset make_windows(std::shared_ptr<const City> city, std::shared_ptr<const Observations> obs,
                     std::size_t window, std::size_t horizon, SplitFractions fractions = {},
                     std::size_t steps_per_day = 96);

}  // namespace share
