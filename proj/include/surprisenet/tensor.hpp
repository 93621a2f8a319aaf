#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace surprisenet {

class TensorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised whenever an operation would produce NaN or Inf. Non-finite values
// are never allowed to propagate silently.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

int64_t shape_size(const std::vector<int64_t>& shape);
std::string shape_str(const std::vector<int64_t>& shape);

// Dense row-major float32 array. Operation outputs are treated as immutable;
// in-place mutation is reserved for parameter updates, which have a single
// writer by construction.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int64_t> shape);
  Tensor(std::vector<int64_t> shape, std::vector<float> values);

  static Tensor scalar(float v);
  static Tensor zeros_like(const Tensor& other);
  static Tensor full(std::vector<int64_t> shape, float v);

  const std::vector<int64_t>& shape() const { return shape_; }
  int64_t size() const { return static_cast<int64_t>(values_.size()); }
  bool empty() const { return values_.empty(); }
  int64_t rank() const { return static_cast<int64_t>(shape_.size()); }

  // 2-D accessors; throw on other ranks.
  int64_t rows() const;
  int64_t cols() const;

  float* data() { return values_.data(); }
  const float* data() const { return values_.data(); }
  std::vector<float>& values() { return values_; }
  const std::vector<float>& values() const { return values_; }

  float item() const;
  float operator[](int64_t i) const { return values_[static_cast<size_t>(i)]; }
  float& operator[](int64_t i) { return values_[static_cast<size_t>(i)]; }
  float operator()(int64_t r, int64_t c) const { return values_[static_cast<size_t>(r * cols() + c)]; }
  float& operator()(int64_t r, int64_t c) { return values_[static_cast<size_t>(r * cols() + c)]; }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  // Throws NumericError naming `where` if any value is NaN/Inf.
  void require_finite(const char* where) const;

 private:
  std::vector<int64_t> shape_;
  std::vector<float> values_;
};

}  // namespace surprisenet
