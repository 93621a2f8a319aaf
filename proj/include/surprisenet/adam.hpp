#pragma once

#include <cstdint>

#include "surprisenet/tensor.hpp"

namespace surprisenet {

struct AdamConfig {
  float learning_rate = 1e-4f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float epsilon = 1e-8f;
};

// First/second moment accumulators for one parameter tensor.
class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(const Tensor& param)
      : m_(Tensor::zeros_like(param)), v_(Tensor::zeros_like(param)) {}

  const Tensor& first_moment() const { return m_; }
  const Tensor& second_moment() const { return v_; }
  int64_t step() const { return step_; }

  friend void adam_step(Tensor& param, const Tensor& grad, AdamState& state, const AdamConfig& cfg);

 private:
  Tensor m_;
  Tensor v_;
  int64_t step_ = 0;
};

// Bias-corrected Adam update. Gradient gating is the caller's business and
// must already be applied.
void adam_step(Tensor& param, const Tensor& grad, AdamState& state, const AdamConfig& cfg);

}  // namespace surprisenet
