#include "surprisenet/tensor.hpp"

#include <cmath>
#include <sstream>

namespace surprisenet {

int64_t shape_size(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return n;
}

std::string shape_str(const std::vector<int64_t>& shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

Tensor::Tensor(std::vector<int64_t> shape) : shape_(std::move(shape)) {
  for (int64_t d : shape_) {
    if (d <= 0) throw TensorError("tensor dimension must be positive, got shape " + shape_str(shape_));
  }
  values_.assign(static_cast<size_t>(shape_size(shape_)), 0.f);
}

Tensor::Tensor(std::vector<int64_t> shape, std::vector<float> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  for (int64_t d : shape_) {
    if (d <= 0) throw TensorError("tensor dimension must be positive, got shape " + shape_str(shape_));
  }
  if (shape_size(shape_) != static_cast<int64_t>(values_.size())) {
    throw TensorError("value count " + std::to_string(values_.size()) + " does not match shape " +
                      shape_str(shape_));
  }
}

Tensor Tensor::scalar(float v) { return Tensor({1}, {v}); }

Tensor Tensor::zeros_like(const Tensor& other) { return Tensor(other.shape_); }

Tensor Tensor::full(std::vector<int64_t> shape, float v) {
  Tensor t(std::move(shape));
  for (auto& x : t.values_) x = v;
  return t;
}

int64_t Tensor::rows() const {
  if (shape_.size() != 2) throw TensorError("rows(): tensor is not 2-D, shape " + shape_str(shape_));
  return shape_[0];
}

int64_t Tensor::cols() const {
  if (shape_.size() != 2) throw TensorError("cols(): tensor is not 2-D, shape " + shape_str(shape_));
  return shape_[1];
}

float Tensor::item() const {
  if (values_.size() != 1) throw TensorError("item(): tensor has " + std::to_string(values_.size()) + " values");
  return values_[0];
}

void Tensor::require_finite(const char* where) const {
  for (float v : values_) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string(where) + " produced a non-finite value");
    }
  }
}

}  // namespace surprisenet
