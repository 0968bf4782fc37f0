#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "share/numerics/tensor.hpp"

namespace share {

/// Compressed sparse rows: row i owns columns[offsets[i] .. offsets[i+1]).
/// `num_cols` is the number of source nodes the column indices point into.
struct Csr {
  std::vector<std::size_t> offsets{0};
  std::vector<std::size_t> columns;
  std::size_t num_cols = 0;

  std::size_t rows() const { return offsets.size() - 1; }
  std::size_t nnz() const { return columns.size(); }
  std::size_t row_begin(std::size_t r) const { return offsets[r]; }
  std::size_t row_end(std::size_t r) const { return offsets[r + 1]; }

  static Csr from_lists(const std::vector<std::vector<std::size_t>>& lists, std::size_t num_cols);
};

enum class OpKind {
  kMatMul,
  kAdd,
  kSub,
  kMul,
  kConcat,
  kSigmoid,
  kTanh,
  kLeakyRelu,
  kRowSoftmax,
  kSum,
  kMean,
  kRowSum,
  kLog,
  kReciprocal,
  kScale,
  kTranspose,
  kGatherRows,
  kEdgeDot,
  kSegmentSoftmax,
  kEdgeAggregate,
};

std::string_view op_name(OpKind kind);
/// Parses a primitive name such as "matmul"; throws on unknown names.
OpKind op_from_name(std::string_view name);

struct OpAttrs {
  double slope = 0.2;      // leaky_relu
  double floor = 1e-12;    // log clamp
  double factor = 1.0;     // scale
  std::shared_ptr<const Csr> graph;                      // edge ops
  std::shared_ptr<const std::vector<std::size_t>> rows;  // gather_rows
};

class Tape;

/// Handle to a tensor living on a Tape.
class Var {
 public:
  Var() = default;

  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Replayable computation record for reverse-mode differentiation.
///
/// Every primitive evaluated through `apply` stores its output on the tape and,
/// when any input requires a gradient, appends an entry to the record. Entries
/// are appended in evaluation order, which is a topological order.
class Tape {
 public:
  struct Entry {
    OpKind kind;
    std::vector<std::size_t> inputs;
    std::size_t output;
    OpAttrs attrs;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Registers a tensor; it participates in differentiation iff requires_grad().
  Var leaf(Tensor value);
  Var constant(Tensor value);

  Var apply(OpKind kind, std::span<const Var> inputs, const OpAttrs& attrs = {});

  /// Fills gradient slots of every requires-grad tensor reachable from `output`.
  void backward(Var output);
  /// Clears all gradients so the record can be replayed.
  void reset_grads();

  const Tensor& value(Var v) const { return slots_[v.id()].value; }
  bool requires_grad(Var v) const { return slots_[v.id()].needs_grad; }
  /// Gradient of the last backward pass; zeros when none reached `v`.
  std::vector<double> grad(Var v) const;

  const std::vector<Entry>& record() const { return record_; }
  std::size_t num_tensors() const { return slots_.size(); }

 private:
  struct Slot {
    Tensor value;
    bool needs_grad = false;
    std::vector<double> grad;
  };

  Var push(Tensor value, bool needs_grad);
  void backprop_entry(const Entry& entry);
  std::vector<double>& grad_slot(std::size_t id);

  std::vector<Slot> slots_;
  std::vector<Entry> record_;
  bool backward_done_ = false;
};

// Primitive wrappers. All inputs must live on the same tape.
Var matmul(Var a, Var b);
/// Elementwise a + b; `b` may also be a row vector [cols] or column [rows, 1].
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var concat(std::span<const Var> parts);
Var concat(Var a, Var b);
Var sigmoid(Var x);
Var tanh(Var x);
Var leaky_relu(Var x, double slope);
Var row_softmax(Var x);
Var sum(Var x);
Var mean(Var x);
/// Rank-2 [n, m] to column [n, 1].
Var row_sum(Var x);
/// log(max(x, floor)).
Var log(Var x, double floor = 1e-12);
/// Elementwise 1 / x; throws on an exact zero.
Var reciprocal(Var x);
Var scale(Var x, double factor);
Var transpose(Var x);
Var gather_rows(Var x, std::shared_ptr<const std::vector<std::size_t>> rows);
/// Per-edge dot product q[row] . k[col] over the CSR pattern; output [nnz].
Var edge_dot(Var q, Var k, std::shared_ptr<const Csr> graph);
/// Softmax of edge values within each row segment.
Var segment_softmax(Var logits, std::shared_ptr<const Csr> graph);
/// out[row] = sum over edges of weight[e] * v[col(e)].
Var edge_aggregate(Var weights, Var v, std::shared_ptr<const Csr> graph);

}  // namespace share
