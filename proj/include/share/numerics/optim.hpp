#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "share/numerics/tensor.hpp"

namespace share {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment estimates, one array per parameter tensor.
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::uint64_t step = 0;
};

/// One bias-corrected Adam update applied in place.
///
/// `grads[i]` pairs with `*params[i]`. The state is lazily sized on the first
/// call and must keep pairing with the same parameter list afterwards.
void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state,
               const AdamConfig& config);

using ScalarFunction = std::function<double(std::span<const double>)>;

/// Central-difference gradient (f(x+h) - f(x-h)) / 2h, coordinate by coordinate.
std::vector<double> finite_difference_gradient(const ScalarFunction& f, std::vector<double> x,
                                               double h = 1e-5);

/// |a - b| / max(|a|, |b|, floor); the floor keeps near-zero components from
/// dominating with pure round-off.
double relative_error(double a, double b, double floor = 1e-6);
double max_relative_error(std::span<const double> a, std::span<const double> b,
                          double floor = 1e-6);

}  // namespace share
