#include "share/temporal/temporal.hpp"

namespace share {

Var gru_cell(const GruWeights& gru, Var h_prev, Var x) {
  const Var hx = concat(h_prev, x);
  const Var r = sigmoid(add(matmul(hx, gru.reset), gru.reset_bias));
  const Var z = sigmoid(add(matmul(hx, gru.update), gru.update_bias));
  const Var rhx = concat(mul(r, h_prev), x);
  const Var candidate = tanh(add(matmul(rhx, gru.candidate), gru.candidate_bias));
  // (1 - z) * h + z * candidate
  return add(h_prev, mul(z, sub(candidate, h_prev)));
}

Var predict_head(Var output_weights, Var h) { return sigmoid(matmul(h, output_weights)); }

}  // namespace share
