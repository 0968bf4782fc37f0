#pragma once

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "share/numerics/optim.hpp"
#include "share/numerics/rng.hpp"
#include "share/numerics/tape.hpp"
#include "share/numerics/tensor.hpp"

namespace share::testing {

inline Tensor random_tensor(SplitMix64& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

inline std::vector<double> to_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

/// Builds a scalar from leaves on a fresh tape.
using ScalarGraph = std::function<Var(Tape&, const std::vector<Var>&)>;

struct GradientComparison {
  double max_relative = 0.0;
  std::vector<std::vector<double>> analytic;
  std::vector<std::vector<double>> numeric;
};

/// Reverse-mode gradient of `build` against central differences for every input.
inline GradientComparison compare_gradients(const ScalarGraph& build, const std::vector<Tensor>& inputs,
                                            double h = 1e-5, double floor = 1e-6) {
  GradientComparison out;
  Tape tape;
  std::vector<Var> leaves;
  for (const Tensor& t : inputs) {
    Tensor copy = t;
    copy.set_requires_grad(true);
    leaves.push_back(tape.leaf(std::move(copy)));
  }
  tape.backward(build(tape, leaves));
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    out.analytic.push_back(tape.grad(leaves[k]));
    const ScalarFunction f = [&](std::span<const double> x) {
      Tape t2;
      std::vector<Var> vars;
      for (std::size_t m = 0; m < inputs.size(); ++m) {
        Tensor copy = inputs[m];
        if (m == k) std::copy(x.begin(), x.end(), copy.values().begin());
        vars.push_back(t2.constant(std::move(copy)));
      }
      return build(t2, vars).value().item();
    };
    out.numeric.push_back(finite_difference_gradient(f, to_vector(inputs[k].values()), h));
    out.max_relative = std::max(out.max_relative, max_relative_error(out.analytic.back(), out.numeric.back(), floor));
  }
  return out;
}

/// Projects any tensor to a scalar with fixed random weights so every output
/// entry receives a distinct upstream gradient.
inline Var weighted_sum(Tape& tape, Var x, std::uint64_t seed = 99) {
  SplitMix64 rng(seed);
  Tensor w = random_tensor(rng, x.shape());
  return sum(mul(x, tape.constant(std::move(w))));
}

inline std::shared_ptr<const Csr> make_csr(const std::vector<std::vector<std::size_t>>& lists, std::size_t cols) {
  return std::make_shared<const Csr>(Csr::from_lists(lists, cols));
}

}  // namespace share::testing
