#include "share/numerics/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace share {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

void check_extents(const Shape& shape) {
  for (auto extent : shape) {
    if (extent == 0) throw ShapeError("tensor: zero extent in shape " + shape_to_string(shape));
  }
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  check_extents(shape_);
  values_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  check_extents(shape_);
  if (values_.size() != shape_size(shape_)) {
    throw ShapeError("tensor: " + std::to_string(values_.size()) + " values do not fill shape " +
                     shape_to_string(shape_));
  }
}

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor(Shape{n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return Tensor(Shape{rows, cols}, std::move(values));
}

void Tensor::bad_axis(std::size_t axis) const {
  throw ShapeError("tensor: axis " + std::to_string(axis) + " out of range for " + shape_to_string(shape_));
}

void Tensor::bad_matrix(const char* what) const {
  throw ShapeError(std::string("tensor: ") + what + " needs rank 1 or 2, got " + shape_to_string(shape_));
}

double Tensor::item() const {
  if (values_.size() != 1) throw ShapeError("tensor: item() on " + shape_to_string(shape_));
  return values_[0];
}

void Tensor::set_grad(std::vector<double> grad) {
  if (grad.size() != values_.size()) {
    throw ShapeError("tensor: gradient of length " + std::to_string(grad.size()) +
                     " for shape " + shape_to_string(shape_));
  }
  grad_ = std::move(grad);
}

bool Tensor::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace share
