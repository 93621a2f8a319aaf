#include "surprisenet/adam.hpp"

#include <cmath>

namespace surprisenet {

void adam_step(Tensor& param, const Tensor& grad, AdamState& state, const AdamConfig& cfg) {
  if (state.m_.empty()) state = AdamState(param);
  if (!param.same_shape(grad) || !param.same_shape(state.m_)) {
    throw TensorError("adam_step: parameter, gradient and state shapes must match");
  }
  state.step_ += 1;
  const double t = static_cast<double>(state.step_);
  const float c1 = static_cast<float>(1.0 / (1.0 - std::pow(static_cast<double>(cfg.beta1), t)));
  const float c2 = static_cast<float>(1.0 / (1.0 - std::pow(static_cast<double>(cfg.beta2), t)));
  float* p = param.data();
  float* m = state.m_.data();
  float* v = state.v_.data();
  const float* g = grad.data();
  for (int64_t i = 0; i < param.size(); ++i) {
    m[i] = cfg.beta1 * m[i] + (1.f - cfg.beta1) * g[i];
    v[i] = cfg.beta2 * v[i] + (1.f - cfg.beta2) * g[i] * g[i];
    const float m_hat = m[i] * c1;
    const float v_hat = v[i] * c2;
    p[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
  param.require_finite("adam_step");
}

}  // namespace surprisenet
