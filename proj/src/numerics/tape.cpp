#include "share/numerics/tape.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace share {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

constexpr std::array<std::pair<OpKind, std::string_view>, 20> kOpNames{{
    {OpKind::kMatMul, "matmul"},
    {OpKind::kAdd, "add"},
    {OpKind::kSub, "sub"},
    {OpKind::kMul, "mul"},
    {OpKind::kConcat, "concat"},
    {OpKind::kSigmoid, "sigmoid"},
    {OpKind::kTanh, "tanh"},
    {OpKind::kLeakyRelu, "leaky_relu"},
    {OpKind::kRowSoftmax, "row_softmax"},
    {OpKind::kSum, "sum"},
    {OpKind::kMean, "mean"},
    {OpKind::kRowSum, "row_sum"},
    {OpKind::kLog, "log"},
    {OpKind::kReciprocal, "reciprocal"},
    {OpKind::kScale, "scale"},
    {OpKind::kTranspose, "transpose"},
    {OpKind::kGatherRows, "gather_rows"},
    {OpKind::kEdgeDot, "edge_dot"},
    {OpKind::kSegmentSoftmax, "segment_softmax"},
    {OpKind::kEdgeAggregate, "edge_aggregate"},
}};

[[noreturn]] void shape_error(OpKind kind, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op_name(kind)) + ": shape mismatch " + shape_to_string(a) +
                   " vs " + shape_to_string(b));
}

[[noreturn]] void shape_error(OpKind kind, const Shape& a, std::string_view what) {
  throw ShapeError(std::string(op_name(kind)) + ": " + std::string(what) + ", got " +
                   shape_to_string(a));
}

enum class Broadcast { kSame, kRow, kColumn };

Broadcast broadcast_mode(OpKind kind, const Shape& a, const Shape& b) {
  if (a == b) return Broadcast::kSame;
  if (a.size() == 2 && b.size() == 1 && b[0] == a[1]) return Broadcast::kRow;
  if (a.size() == 2 && b.size() == 2 && b[0] == a[0] && b[1] == 1) return Broadcast::kColumn;
  shape_error(kind, a, b);
}

// Index of the b element paired with flat a index i.
inline std::size_t bindex(Broadcast mode, std::size_t i, std::size_t cols) {
  switch (mode) {
    case Broadcast::kSame: return i;
    case Broadcast::kRow: return i % cols;
    case Broadcast::kColumn: return i / cols;
  }
  return i;
}

double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void softmax_inplace(std::span<double> row) {
  const double mx = *std::max_element(row.begin(), row.end());
  double total = 0.0;
  for (double& v : row) {
    v = std::exp(v - mx);
    total += v;
  }
  for (double& v : row) v /= total;
}

const Csr& require_graph(OpKind kind, const OpAttrs& attrs) {
  if (!attrs.graph) throw Error(std::string(op_name(kind)) + ": missing graph attribute");
  return *attrs.graph;
}

Tensor forward(OpKind kind, std::span<const Tensor* const> in, const OpAttrs& attrs) {
  auto arity = [&](std::size_t n) {
    if (in.size() != n) {
      throw Error(std::string(op_name(kind)) + ": expects " + std::to_string(n) + " inputs, got " +
                  std::to_string(in.size()));
    }
  };
  switch (kind) {
    case OpKind::kMatMul: {
      arity(2);
      const Tensor& a = *in[0];
      const Tensor& b = *in[1];
      if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
        shape_error(kind, a.shape(), b.shape());
      }
      Tensor out(Shape{a.dim(0), b.dim(1)});
      MutMap(out.values().data(), a.dim(0), b.dim(1)).noalias() =
          ConstMap(a.values().data(), a.dim(0), a.dim(1)) *
          ConstMap(b.values().data(), b.dim(0), b.dim(1));
      return out;
    }
    case OpKind::kAdd:
    case OpKind::kSub:
    case OpKind::kMul: {
      arity(2);
      const Tensor& a = *in[0];
      const Tensor& b = *in[1];
      const Broadcast mode = broadcast_mode(kind, a.shape(), b.shape());
      const std::size_t cols = a.rank() == 2 ? a.dim(1) : 1;
      Tensor out(a.shape());
      auto o = out.values();
      auto av = a.values();
      auto bv = b.values();
      auto run = [&](auto op) {
        switch (mode) {
          case Broadcast::kSame:
            for (std::size_t i = 0; i < av.size(); ++i) o[i] = op(av[i], bv[i]);
            break;
          case Broadcast::kRow:
            for (std::size_t i = 0; i < av.size(); i += cols) {
              for (std::size_t j = 0; j < cols; ++j) o[i + j] = op(av[i + j], bv[j]);
            }
            break;
          case Broadcast::kColumn:
            for (std::size_t r = 0, i = 0; i < av.size(); ++r, i += cols) {
              const double y = bv[r];
              for (std::size_t j = 0; j < cols; ++j) o[i + j] = op(av[i + j], y);
            }
            break;
        }
      };
      if (kind == OpKind::kAdd) {
        run([](double x, double y) { return x + y; });
      } else if (kind == OpKind::kSub) {
        run([](double x, double y) { return x - y; });
      } else {
        run([](double x, double y) { return x * y; });
      }
      return out;
    }
    case OpKind::kConcat: {
      if (in.empty()) throw Error("concat: expects at least one input");
      const std::size_t rank = in[0]->rank();
      if (rank != 1 && rank != 2) shape_error(kind, in[0]->shape(), "needs rank 1 or 2");
      const std::size_t rows = in[0]->rows();
      std::size_t total = 0;
      for (const Tensor* t : in) {
        if (t->rank() != rank || t->rows() != rows) shape_error(kind, in[0]->shape(), t->shape());
        total += t->cols();
      }
      Tensor out(rank == 1 ? Shape{total} : Shape{rows, total});
      std::size_t offset = 0;
      for (const Tensor* t : in) {
        const std::size_t c = t->cols();
        for (std::size_t r = 0; r < rows; ++r) {
          std::copy_n(t->values().begin() + r * c, c, out.values().begin() + r * total + offset);
        }
        offset += c;
      }
      return out;
    }
    case OpKind::kSigmoid:
    case OpKind::kTanh:
    case OpKind::kLeakyRelu:
    case OpKind::kLog:
    case OpKind::kReciprocal:
    case OpKind::kScale: {
      arity(1);
      if (kind == OpKind::kLeakyRelu && !(attrs.slope > 0)) throw Error("leaky_relu: slope must be positive");
      if (kind == OpKind::kLog && !(attrs.floor > 0)) throw Error("log: clamp floor must be positive");
      Tensor out(in[0]->shape());
      auto x = in[0]->values();
      auto o = out.values();
      const std::size_t n = x.size();
      switch (kind) {
        case OpKind::kSigmoid:
          for (std::size_t i = 0; i < n; ++i) o[i] = sigmoid_scalar(x[i]);
          break;
        case OpKind::kTanh:
          for (std::size_t i = 0; i < n; ++i) o[i] = std::tanh(x[i]);
          break;
        case OpKind::kLeakyRelu:
          for (std::size_t i = 0; i < n; ++i) o[i] = x[i] > 0 ? x[i] : attrs.slope * x[i];
          break;
        case OpKind::kLog:
          for (std::size_t i = 0; i < n; ++i) o[i] = std::log(std::max(x[i], attrs.floor));
          break;
        case OpKind::kReciprocal:
          for (std::size_t i = 0; i < n; ++i) {
            if (x[i] == 0.0) throw Error("reciprocal: zero entry at index " + std::to_string(i));
            o[i] = 1.0 / x[i];
          }
          break;
        default:
          for (std::size_t i = 0; i < n; ++i) o[i] = attrs.factor * x[i];
          break;
      }
      return out;
    }
    case OpKind::kRowSoftmax: {
      arity(1);
      const Tensor& x = *in[0];
      if (x.rank() != 1 && x.rank() != 2) shape_error(kind, x.shape(), "needs rank 1 or 2");
      Tensor out(x.shape(), std::vector<double>(x.values().begin(), x.values().end()));
      const std::size_t c = x.cols();
      for (std::size_t r = 0; r < x.rows(); ++r) softmax_inplace(out.values().subspan(r * c, c));
      return out;
    }
    case OpKind::kSum:
    case OpKind::kMean: {
      arity(1);
      double total = 0.0;
      for (double v : in[0]->values()) total += v;
      if (kind == OpKind::kMean) total /= static_cast<double>(in[0]->size());
      return Tensor::scalar(total);
    }
    case OpKind::kRowSum: {
      arity(1);
      const Tensor& x = *in[0];
      if (x.rank() != 2) shape_error(kind, x.shape(), "needs rank 2");
      Tensor out(Shape{x.dim(0), 1});
      const std::size_t rows = x.dim(0);
      const std::size_t cols = x.dim(1);
      const double* xv = x.values().data();
      for (std::size_t r = 0; r < rows; ++r) {
        double total = 0.0;
        for (std::size_t c = 0; c < cols; ++c) total += xv[r * cols + c];
        out[r] = total;
      }
      return out;
    }
    case OpKind::kTranspose: {
      arity(1);
      const Tensor& x = *in[0];
      if (x.rank() != 2) shape_error(kind, x.shape(), "needs rank 2");
      Tensor out(Shape{x.dim(1), x.dim(0)});
      MutMap(out.values().data(), x.dim(1), x.dim(0)) =
          ConstMap(x.values().data(), x.dim(0), x.dim(1)).transpose();
      return out;
    }
    case OpKind::kGatherRows: {
      arity(1);
      const Tensor& x = *in[0];
      if (x.rank() != 2) shape_error(kind, x.shape(), "needs rank 2");
      if (!attrs.rows || attrs.rows->empty()) throw Error("gather_rows: empty row selection");
      const std::size_t c = x.dim(1);
      Tensor out(Shape{attrs.rows->size(), c});
      for (std::size_t r = 0; r < attrs.rows->size(); ++r) {
        const std::size_t src = (*attrs.rows)[r];
        if (src >= x.dim(0)) throw Error("gather_rows: row index out of range");
        std::copy_n(x.values().begin() + src * c, c, out.values().begin() + r * c);
      }
      return out;
    }
    case OpKind::kEdgeDot: {
      arity(2);
      const Csr& g = require_graph(kind, attrs);
      const Tensor& q = *in[0];
      const Tensor& k = *in[1];
      if (q.rank() != 2 || k.rank() != 2 || q.dim(1) != k.dim(1)) shape_error(kind, q.shape(), k.shape());
      if (q.dim(0) != g.rows() || k.dim(0) != g.num_cols) {
        throw ShapeError("edge_dot: graph is " + std::to_string(g.rows()) + "x" +
                         std::to_string(g.num_cols) + " but operands are " +
                         shape_to_string(q.shape()) + " and " + shape_to_string(k.shape()));
      }
      if (g.nnz() == 0) throw Error("edge_dot: graph has no edges");
      const std::size_t d = q.dim(1);
      Tensor out(Shape{g.nnz()});
      for (std::size_t r = 0; r < g.rows(); ++r) {
        const double* qr = q.values().data() + r * d;
        for (std::size_t e = g.row_begin(r); e < g.row_end(r); ++e) {
          const double* kc = k.values().data() + g.columns[e] * d;
          double acc = 0.0;
          for (std::size_t j = 0; j < d; ++j) acc += qr[j] * kc[j];
          out[e] = acc;
        }
      }
      return out;
    }
    case OpKind::kSegmentSoftmax: {
      arity(1);
      const Csr& g = require_graph(kind, attrs);
      const Tensor& x = *in[0];
      if (x.rank() != 1 || x.size() != g.nnz()) shape_error(kind, x.shape(), "needs [nnz]");
      Tensor out(x.shape(), std::vector<double>(x.values().begin(), x.values().end()));
      for (std::size_t r = 0; r < g.rows(); ++r) {
        const std::size_t b = g.row_begin(r);
        const std::size_t e = g.row_end(r);
        if (e > b) softmax_inplace(out.values().subspan(b, e - b));
      }
      return out;
    }
    case OpKind::kEdgeAggregate: {
      arity(2);
      const Csr& g = require_graph(kind, attrs);
      const Tensor& w = *in[0];
      const Tensor& v = *in[1];
      if (w.rank() != 1 || w.size() != g.nnz()) shape_error(kind, w.shape(), "weights need [nnz]");
      if (v.rank() != 2 || v.dim(0) != g.num_cols) shape_error(kind, v.shape(), "values need [num_cols, d]");
      const std::size_t d = v.dim(1);
      Tensor out(Shape{g.rows(), d});
      for (std::size_t r = 0; r < g.rows(); ++r) {
        double* o = out.values().data() + r * d;
        for (std::size_t e = g.row_begin(r); e < g.row_end(r); ++e) {
          const double a = w[e];
          const double* vc = v.values().data() + g.columns[e] * d;
          for (std::size_t j = 0; j < d; ++j) o[j] += a * vc[j];
        }
      }
      return out;
    }
  }
  throw Error("unknown primitive kind " + std::to_string(static_cast<int>(kind)));
}

}  // namespace

std::string_view op_name(OpKind kind) {
  for (const auto& [k, name] : kOpNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

OpKind op_from_name(std::string_view name) {
  for (const auto& [k, n] : kOpNames) {
    if (n == name) return k;
  }
  throw Error("unknown primitive '" + std::string(name) + "'");
}

Csr Csr::from_lists(const std::vector<std::vector<std::size_t>>& lists, std::size_t num_cols) {
  Csr csr;
  csr.num_cols = num_cols;
  csr.offsets.reserve(lists.size() + 1);
  for (const auto& row : lists) {
    for (auto c : row) {
      if (c >= num_cols) throw Error("csr: column index out of range");
      csr.columns.push_back(c);
    }
    csr.offsets.push_back(csr.columns.size());
  }
  return csr;
}

const Tensor& Var::value() const { return tape_->value(*this); }

Var Tape::push(Tensor value, bool needs_grad) {
  value.clear_grad();
  slots_.push_back(Slot{std::move(value), needs_grad, {}});
  return Var(this, slots_.size() - 1);
}

Var Tape::leaf(Tensor value) {
  const bool rg = value.requires_grad();
  return push(std::move(value), rg);
}

Var Tape::constant(Tensor value) {
  value.set_requires_grad(false);
  return push(std::move(value), false);
}

Var Tape::apply(OpKind kind, std::span<const Var> inputs, const OpAttrs& attrs) {
  std::vector<const Tensor*> values;
  values.reserve(inputs.size());
  bool needs_grad = false;
  for (const Var& v : inputs) {
    if (&v.tape() != this) throw Error(std::string(op_name(kind)) + ": input from another tape");
    values.push_back(&slots_[v.id()].value);
    needs_grad = needs_grad || slots_[v.id()].needs_grad;
  }
  Tensor out = forward(kind, values, attrs);
  Var result = push(std::move(out), needs_grad);
  if (needs_grad) {
    Entry entry{kind, {}, result.id(), attrs};
    entry.inputs.reserve(inputs.size());
    for (const Var& v : inputs) entry.inputs.push_back(v.id());
    record_.push_back(std::move(entry));
  }
  return result;
}

std::vector<double>& Tape::grad_slot(std::size_t id) {
  Slot& s = slots_[id];
  if (s.grad.empty()) s.grad.assign(s.value.size(), 0.0);
  return s.grad;
}

std::vector<double> Tape::grad(Var v) const {
  const Slot& s = slots_[v.id()];
  if (s.grad.empty()) return std::vector<double>(s.value.size(), 0.0);
  return s.grad;
}

void Tape::reset_grads() {
  for (Slot& s : slots_) s.grad.clear();
  backward_done_ = false;
}

void Tape::backward(Var output) {
  if (&output.tape() != this) throw Error("backward: output from another tape");
  if (backward_done_) throw Error("backward: called twice without reset_grads()");
  const Slot& out = slots_[output.id()];
  if (out.value.size() != 1) {
    throw Error("backward: output must be scalar, got " + shape_to_string(out.value.shape()));
  }
  backward_done_ = true;
  if (!out.needs_grad) return;
  grad_slot(output.id())[0] = 1.0;
  for (auto it = record_.rbegin(); it != record_.rend(); ++it) {
    if (it->output > output.id()) continue;
    if (slots_[it->output].grad.empty()) continue;
    backprop_entry(*it);
  }
}

void Tape::backprop_entry(const Entry& entry) {
  const std::vector<double>& gy = slots_[entry.output].grad;
  const Tensor& y = slots_[entry.output].value;
  auto wants = [&](std::size_t k) { return slots_[entry.inputs[k]].needs_grad; };
  auto input = [&](std::size_t k) -> const Tensor& { return slots_[entry.inputs[k]].value; };
  const OpAttrs& attrs = entry.attrs;

  switch (entry.kind) {
    case OpKind::kMatMul: {
      const Tensor& a = input(0);
      const Tensor& b = input(1);
      ConstMap g(gy.data(), a.dim(0), b.dim(1));
      if (wants(0)) {
        MutMap(grad_slot(entry.inputs[0]).data(), a.dim(0), a.dim(1)).noalias() +=
            g * ConstMap(b.values().data(), b.dim(0), b.dim(1)).transpose();
      }
      if (wants(1)) {
        MutMap(grad_slot(entry.inputs[1]).data(), b.dim(0), b.dim(1)).noalias() +=
            ConstMap(a.values().data(), a.dim(0), a.dim(1)).transpose() * g;
      }
      return;
    }
    case OpKind::kAdd:
    case OpKind::kSub:
    case OpKind::kMul: {
      const Tensor& a = input(0);
      const Tensor& b = input(1);
      const Broadcast mode = broadcast_mode(entry.kind, a.shape(), b.shape());
      const std::size_t cols = a.rank() == 2 ? a.dim(1) : 1;
      if (wants(0)) {
        auto& ga = grad_slot(entry.inputs[0]);
        if (entry.kind != OpKind::kMul) {
          for (std::size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i];
        } else if (mode == Broadcast::kSame) {
          const double* bv = b.values().data();
          for (std::size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i] * bv[i];
        } else {
          for (std::size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i] * b[bindex(mode, i, cols)];
        }
      }
      if (wants(1)) {
        auto& gb = grad_slot(entry.inputs[1]);
        const double sign = entry.kind == OpKind::kSub ? -1.0 : 1.0;
        for (std::size_t i = 0; i < gy.size(); ++i) {
          const double term = entry.kind == OpKind::kMul ? gy[i] * a[i] : sign * gy[i];
          gb[bindex(mode, i, cols)] += term;
        }
      }
      return;
    }
    case OpKind::kConcat: {
      const std::size_t rows = y.rows();
      const std::size_t total = y.cols();
      std::size_t offset = 0;
      for (std::size_t k = 0; k < entry.inputs.size(); ++k) {
        const std::size_t c = input(k).cols();
        if (wants(k)) {
          auto& g = grad_slot(entry.inputs[k]);
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t j = 0; j < c; ++j) g[r * c + j] += gy[r * total + offset + j];
          }
        }
        offset += c;
      }
      return;
    }
    case OpKind::kSigmoid:
    case OpKind::kTanh:
    case OpKind::kLeakyRelu:
    case OpKind::kLog:
    case OpKind::kReciprocal:
    case OpKind::kScale: {
      if (!wants(0)) return;
      const Tensor& x = input(0);
      auto& g = grad_slot(entry.inputs[0]);
      const std::size_t n = gy.size();
      const double* yv = y.values().data();
      const double* xv = x.values().data();
      switch (entry.kind) {
        case OpKind::kSigmoid:
          for (std::size_t i = 0; i < n; ++i) g[i] += gy[i] * (yv[i] * (1.0 - yv[i]));
          break;
        case OpKind::kTanh:
          for (std::size_t i = 0; i < n; ++i) g[i] += gy[i] * (1.0 - yv[i] * yv[i]);
          break;
        case OpKind::kLeakyRelu:
          for (std::size_t i = 0; i < n; ++i) g[i] += gy[i] * (xv[i] > 0 ? 1.0 : attrs.slope);
          break;
        case OpKind::kLog:
          for (std::size_t i = 0; i < n; ++i) g[i] += xv[i] > attrs.floor ? gy[i] / xv[i] : 0.0;
          break;
        case OpKind::kReciprocal:
          for (std::size_t i = 0; i < n; ++i) g[i] -= gy[i] * yv[i] * yv[i];
          break;
        default:
          for (std::size_t i = 0; i < n; ++i) g[i] += gy[i] * attrs.factor;
          break;
      }
      return;
    }
    case OpKind::kRowSoftmax: {
      if (!wants(0)) return;
      auto& g = grad_slot(entry.inputs[0]);
      const std::size_t c = y.cols();
      for (std::size_t r = 0; r < y.rows(); ++r) {
        double dot = 0.0;
        for (std::size_t j = 0; j < c; ++j) dot += gy[r * c + j] * y[r * c + j];
        for (std::size_t j = 0; j < c; ++j) g[r * c + j] += y[r * c + j] * (gy[r * c + j] - dot);
      }
      return;
    }
    case OpKind::kSum:
    case OpKind::kMean: {
      if (!wants(0)) return;
      auto& g = grad_slot(entry.inputs[0]);
      const double d =
          entry.kind == OpKind::kMean ? gy[0] / static_cast<double>(g.size()) : gy[0];
      for (double& v : g) v += d;
      return;
    }
    case OpKind::kRowSum: {
      if (!wants(0)) return;
      const Tensor& x = input(0);
      auto& g = grad_slot(entry.inputs[0]);
      const std::size_t rows = x.dim(0);
      const std::size_t cols = x.dim(1);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) g[r * cols + c] += gy[r];
      }
      return;
    }
    case OpKind::kTranspose: {
      if (!wants(0)) return;
      const Tensor& x = input(0);
      MutMap(grad_slot(entry.inputs[0]).data(), x.dim(0), x.dim(1)) +=
          ConstMap(gy.data(), x.dim(1), x.dim(0)).transpose();
      return;
    }
    case OpKind::kGatherRows: {
      if (!wants(0)) return;
      const std::size_t c = input(0).dim(1);
      auto& g = grad_slot(entry.inputs[0]);
      for (std::size_t r = 0; r < attrs.rows->size(); ++r) {
        const std::size_t dst = (*attrs.rows)[r];
        for (std::size_t j = 0; j < c; ++j) g[dst * c + j] += gy[r * c + j];
      }
      return;
    }
    case OpKind::kEdgeDot: {
      const Csr& gr = *attrs.graph;
      const Tensor& q = input(0);
      const Tensor& k = input(1);
      const std::size_t d = q.dim(1);
      // Inputs may alias (self-attention), so both grads accumulate into the same slot.
      std::vector<double>* gq = wants(0) ? &grad_slot(entry.inputs[0]) : nullptr;
      std::vector<double>* gk = wants(1) ? &grad_slot(entry.inputs[1]) : nullptr;
      const double* qv = q.values().data();
      const double* kv = k.values().data();
      for (std::size_t r = 0; r < gr.rows(); ++r) {
        for (std::size_t e = gr.row_begin(r); e < gr.row_end(r); ++e) {
          const std::size_t c = gr.columns[e];
          const double ge = gy[e];
          if (ge == 0.0) continue;
          if (gq) {
            double* dst = gq->data() + r * d;
            const double* src = kv + c * d;
            for (std::size_t j = 0; j < d; ++j) dst[j] += ge * src[j];
          }
          if (gk) {
            double* dst = gk->data() + c * d;
            const double* src = qv + r * d;
            for (std::size_t j = 0; j < d; ++j) dst[j] += ge * src[j];
          }
        }
      }
      return;
    }
    case OpKind::kSegmentSoftmax: {
      if (!wants(0)) return;
      const Csr& gr = *attrs.graph;
      auto& g = grad_slot(entry.inputs[0]);
      for (std::size_t r = 0; r < gr.rows(); ++r) {
        double dot = 0.0;
        for (std::size_t e = gr.row_begin(r); e < gr.row_end(r); ++e) dot += gy[e] * y[e];
        for (std::size_t e = gr.row_begin(r); e < gr.row_end(r); ++e) g[e] += y[e] * (gy[e] - dot);
      }
      return;
    }
    case OpKind::kEdgeAggregate: {
      const Csr& gr = *attrs.graph;
      const Tensor& w = input(0);
      const Tensor& v = input(1);
      const std::size_t d = v.dim(1);
      std::vector<double>* gw = wants(0) ? &grad_slot(entry.inputs[0]) : nullptr;
      std::vector<double>* gv = wants(1) ? &grad_slot(entry.inputs[1]) : nullptr;
      const double* vv = v.values().data();
      for (std::size_t r = 0; r < gr.rows(); ++r) {
        const double* go = gy.data() + r * d;
        for (std::size_t e = gr.row_begin(r); e < gr.row_end(r); ++e) {
          const std::size_t c = gr.columns[e];
          if (gw) {
            const double* vc = vv + c * d;
            double acc = 0.0;
            for (std::size_t j = 0; j < d; ++j) acc += go[j] * vc[j];
            (*gw)[e] += acc;
          }
          if (gv) {
            const double a = w[e];
            double* dst = gv->data() + c * d;
            for (std::size_t j = 0; j < d; ++j) dst[j] += a * go[j];
          }
        }
      }
      return;
    }
  }
  throw Error("backward: unknown primitive kind");
}

namespace {

Var apply1(OpKind kind, Var x, const OpAttrs& attrs = {}) {
  const std::array<Var, 1> in{x};
  return x.tape().apply(kind, in, attrs);
}

Var apply2(OpKind kind, Var a, Var b, const OpAttrs& attrs = {}) {
  const std::array<Var, 2> in{a, b};
  return a.tape().apply(kind, in, attrs);
}

}  // namespace

Var matmul(Var a, Var b) { return apply2(OpKind::kMatMul, a, b); }
Var add(Var a, Var b) { return apply2(OpKind::kAdd, a, b); }
Var sub(Var a, Var b) { return apply2(OpKind::kSub, a, b); }
Var mul(Var a, Var b) { return apply2(OpKind::kMul, a, b); }

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw Error("concat: expects at least one input");
  return parts.front().tape().apply(OpKind::kConcat, parts);
}

Var concat(Var a, Var b) { return apply2(OpKind::kConcat, a, b); }
Var sigmoid(Var x) { return apply1(OpKind::kSigmoid, x); }
Var reciprocal(Var x) { return apply1(OpKind::kReciprocal, x); }
Var tanh(Var x) { return apply1(OpKind::kTanh, x); }

Var leaky_relu(Var x, double slope) {
  OpAttrs attrs;
  attrs.slope = slope;
  return apply1(OpKind::kLeakyRelu, x, attrs);
}

Var row_softmax(Var x) { return apply1(OpKind::kRowSoftmax, x); }
Var sum(Var x) { return apply1(OpKind::kSum, x); }
Var mean(Var x) { return apply1(OpKind::kMean, x); }
Var row_sum(Var x) { return apply1(OpKind::kRowSum, x); }

Var log(Var x, double floor) {
  OpAttrs attrs;
  attrs.floor = floor;
  return apply1(OpKind::kLog, x, attrs);
}

Var scale(Var x, double factor) {
  OpAttrs attrs;
  attrs.factor = factor;
  return apply1(OpKind::kScale, x, attrs);
}

Var transpose(Var x) { return apply1(OpKind::kTranspose, x); }

Var gather_rows(Var x, std::shared_ptr<const std::vector<std::size_t>> rows) {
  OpAttrs attrs;
  attrs.rows = std::move(rows);
  return apply1(OpKind::kGatherRows, x, attrs);
}

Var edge_dot(Var q, Var k, std::shared_ptr<const Csr> graph) {
  OpAttrs attrs;
  attrs.graph = std::move(graph);
  return apply2(OpKind::kEdgeDot, q, k, attrs);
}

Var segment_softmax(Var logits, std::shared_ptr<const Csr> graph) {
  OpAttrs attrs;
  attrs.graph = std::move(graph);
  return apply1(OpKind::kSegmentSoftmax, logits, attrs);
}

Var edge_aggregate(Var weights, Var v, std::shared_ptr<const Csr> graph) {
  OpAttrs attrs;
  attrs.graph = std::move(graph);
  return apply2(OpKind::kEdgeAggregate, weights, v, attrs);
}

}  // namespace share
