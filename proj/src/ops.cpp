#include "surprisenet/ops.hpp"

#include <Eigen/Core>

#include <cmath>
#include <string>

namespace surprisenet::ops {

namespace {

using MatRM = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<MatRM>;
using MapC = Eigen::Map<const MatRM>;

MapC map2(const Tensor& t) { return MapC(t.data(), t.rows(), t.cols()); }

void require_2d(const Tensor& t, const char* op) {
  if (t.rank() != 2) throw TensorError(std::string(op) + ": expected a 2-D tensor, got " + shape_str(t.shape()));
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_2d(a, "matmul");
  require_2d(b, "matmul");
  if (a.cols() != b.rows()) {
    throw TensorError("matmul: inner dimensions disagree, " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  }
  Tensor out({a.rows(), b.cols()});
  MapM(out.data(), out.rows(), out.cols()).noalias() = map2(a) * map2(b);
  out.require_finite("matmul");
  return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_2d(a, "matmul_nt");
  require_2d(b, "matmul_nt");
  if (a.cols() != b.cols()) {
    throw TensorError("matmul_nt: inner dimensions disagree, " + shape_str(a.shape()) + " x " +
                      shape_str(b.shape()) + "^T");
  }
  Tensor out({a.rows(), b.rows()});
  MapM(out.data(), out.rows(), out.cols()).noalias() = map2(a) * map2(b).transpose();
  out.require_finite("matmul_nt");
  return out;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  require_2d(a, "matmul_tn");
  require_2d(b, "matmul_tn");
  if (a.rows() != b.rows()) {
    throw TensorError("matmul_tn: inner dimensions disagree, " + shape_str(a.shape()) + "^T x " +
                      shape_str(b.shape()));
  }
  Tensor out({a.cols(), b.cols()});
  MapM(out.data(), out.rows(), out.cols()).noalias() = map2(a).transpose() * map2(b);
  out.require_finite("matmul_tn");
  return out;
}

Tensor linear(const Tensor& x, const Tensor& weights, const Tensor& bias) {
  require_2d(x, "linear");
  require_2d(weights, "linear");
  if (x.cols() != weights.cols()) {
    throw TensorError("linear: input width " + std::to_string(x.cols()) + " does not match weight fan-in " +
                      std::to_string(weights.cols()));
  }
  if (bias.size() != weights.rows()) {
    throw TensorError("linear: bias size " + std::to_string(bias.size()) + " does not match fan-out " +
                      std::to_string(weights.rows()));
  }
  Tensor out({x.rows(), weights.rows()});
  MapM o(out.data(), out.rows(), out.cols());
  o.noalias() = map2(x) * map2(weights).transpose();
  Eigen::Map<const Eigen::RowVectorXf> b(bias.data(), bias.size());
  o.rowwise() += b;
  out.require_finite("linear");
  return out;
}

Tensor relu(const Tensor& x) {
  Tensor out(x.shape());
  const float* in = x.data();
  float* o = out.data();
  for (int64_t i = 0; i < x.size(); ++i) o[i] = in[i] > 0.f ? in[i] : 0.f;
  out.require_finite("relu");
  return out;
}

Tensor select_visible(const Tensor& weights, const std::vector<uint8_t>& visible) {
  if (visible.empty()) return weights;
  if (static_cast<int64_t>(visible.size()) != weights.size()) {
    throw TensorError("select_visible: mask size does not match weight count");
  }
  Tensor out(weights.shape());
  const float* w = weights.data();
  float* o = out.data();
  for (int64_t i = 0; i < weights.size(); ++i) o[i] = visible[static_cast<size_t>(i)] ? w[i] : 0.f;
  return out;
}

Tensor col_sums(const Tensor& x) {
  require_2d(x, "col_sums");
  Tensor out({x.cols()});
  for (int64_t j = 0; j < x.cols(); ++j) {
    double s = 0.0;
    for (int64_t i = 0; i < x.rows(); ++i) s += x(i, j);
    out[j] = static_cast<float>(s);
  }
  out.require_finite("col_sums");
  return out;
}

float mse(const Tensor& x, const Tensor& x_hat) {
  if (!x.same_shape(x_hat)) {
    throw TensorError("mse: shape mismatch " + shape_str(x.shape()) + " vs " + shape_str(x_hat.shape()));
  }
  double s = 0.0;
  const float* a = x.data();
  const float* b = x_hat.data();
  for (int64_t i = 0; i < x.size(); ++i) {
    double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    s += d * d;
  }
  float out = static_cast<float>(s / static_cast<double>(x.size()));
  if (!std::isfinite(out)) throw NumericError("mse produced a non-finite value");
  return out;
}

std::vector<float> per_row_mse(const Tensor& x, const Tensor& x_hat) {
  if (!x.same_shape(x_hat)) {
    throw TensorError("per_row_mse: shape mismatch " + shape_str(x.shape()) + " vs " + shape_str(x_hat.shape()));
  }
  if (x.rank() != 2) throw TensorError("per_row_mse: expected 2-D tensors");
  std::vector<float> out(static_cast<size_t>(x.rows()));
  for (int64_t i = 0; i < x.rows(); ++i) {
    double s = 0.0;
    for (int64_t j = 0; j < x.cols(); ++j) {
      double d = static_cast<double>(x(i, j)) - static_cast<double>(x_hat(i, j));
      s += d * d;
    }
    float v = static_cast<float>(s / static_cast<double>(x.cols()));
    if (!std::isfinite(v)) throw NumericError("per_row_mse produced a non-finite value");
    out[static_cast<size_t>(i)] = v;
  }
  return out;
}

float cross_entropy(const Tensor& logits, const std::vector<int>& labels, Tensor* softmax_out) {
  require_2d(logits, "cross_entropy");
  if (static_cast<int64_t>(labels.size()) != logits.rows()) {
    throw TensorError("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                      std::to_string(logits.rows()) + " rows");
  }
  const int64_t n = logits.rows();
  const int64_t c = logits.cols();
  for (int y : labels) {
    if (y < 0 || y >= c) {
      throw TensorError("cross_entropy: label " + std::to_string(y) + " outside [0, " + std::to_string(c) + ")");
    }
  }
  Tensor softmax({n, c});
  double loss = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    float m = logits(i, 0);
    for (int64_t j = 1; j < c; ++j) m = std::max(m, logits(i, j));
    double denom = 0.0;
    for (int64_t j = 0; j < c; ++j) denom += std::exp(static_cast<double>(logits(i, j)) - m);
    double lse = static_cast<double>(m) + std::log(denom);
    loss += lse - static_cast<double>(logits(i, labels[static_cast<size_t>(i)]));
    for (int64_t j = 0; j < c; ++j) {
      softmax(i, j) = static_cast<float>(std::exp(static_cast<double>(logits(i, j)) - lse));
    }
  }
  float out = static_cast<float>(loss / static_cast<double>(n));
  if (!std::isfinite(out)) throw NumericError("cross_entropy produced a non-finite value");
  if (softmax_out) *softmax_out = std::move(softmax);
  return out;
}

float kl_standard_normal(const Tensor& mu, const Tensor& log_var) {
  if (!mu.same_shape(log_var)) {
    throw TensorError("kl_standard_normal: shape mismatch " + shape_str(mu.shape()) + " vs " +
                      shape_str(log_var.shape()));
  }
  const int64_t rows = mu.rank() == 2 ? mu.rows() : 1;
  double s = 0.0;
  const float* m = mu.data();
  const float* lv = log_var.data();
  for (int64_t i = 0; i < mu.size(); ++i) {
    double md = m[i];
    double lvd = lv[i];
    s += -0.5 * (1.0 + lvd - md * md - std::exp(lvd));
  }
  float out = static_cast<float>(s / static_cast<double>(rows));
  if (!std::isfinite(out)) throw NumericError("kl_standard_normal produced a non-finite value");
  return out;
}

Tensor reparameterize(const Tensor& mu, const Tensor& log_var, const Tensor& noise) {
  if (!mu.same_shape(log_var) || !mu.same_shape(noise)) {
    throw TensorError("reparameterize: mu " + shape_str(mu.shape()) + ", log_var " + shape_str(log_var.shape()) +
                      ", noise " + shape_str(noise.shape()) + " must share a shape");
  }
  Tensor out(mu.shape());
  const float* m = mu.data();
  const float* lv = log_var.data();
  const float* e = noise.data();
  float* o = out.data();
  for (int64_t i = 0; i < mu.size(); ++i) o[i] = m[i] + std::exp(lv[i] * 0.5f) * e[i];
  out.require_finite("reparameterize");
  return out;
}

}  // namespace surprisenet::ops
