#pragma once

#include "share/numerics/tape.hpp"

namespace share {

/// Gate weights act on the concatenation [h, x], shape (|h| + |x|) x |h|.
struct GruWeights {
  Var reset;
  Var update;
  Var candidate;
  Var reset_bias;
  Var update_bias;
  Var candidate_bias;
};

/// One GRU step applied row-wise: every lot shares the weights and carries its
/// own hidden state row. `h_prev` is N x |h|, `x` is N x |x|.
Var gru_cell(const GruWeights& gru, Var h_prev, Var x);

/// sigmoid(h W_o): normalized predictions for the next tau steps, N x tau.
Var predict_head(Var output_weights, Var h);

}  // namespace share
