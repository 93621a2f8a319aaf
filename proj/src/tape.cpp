#include "surprisenet/tape.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "surprisenet/ops.hpp"

namespace surprisenet {

namespace {

void check_var(Var v, size_t count, const char* op) {
  if (!v.valid() || static_cast<size_t>(v.id) >= count) {
    throw TensorError(std::string(op) + ": invalid tape handle");
  }
}

}  // namespace

Var GradientTape::push(Tensor value, std::function<void(GradientTape&, const Tensor&)> back) {
  Var v{static_cast<int32_t>(nodes_.size())};
  nodes_.push_back(Node{std::move(value), std::move(back)});
  return v;
}

void GradientTape::accumulate(Var v, const Tensor& g) {
  g.require_finite("gradient");
  Tensor& slot = grads_[static_cast<size_t>(v.id)];
  if (slot.empty()) {
    slot = g;
    return;
  }
  if (!slot.same_shape(g)) throw TensorError("gradient accumulation shape mismatch");
  float* a = slot.data();
  const float* b = g.data();
  for (int64_t i = 0; i < slot.size(); ++i) a[i] += b[i];
}

Var GradientTape::watch(const Tensor& param) { return push(param, nullptr); }

Var GradientTape::constant(const Tensor& value) { return push(value, nullptr); }

const Tensor& GradientTape::value(Var v) const {
  check_var(v, nodes_.size(), "value");
  return nodes_[static_cast<size_t>(v.id)].value;
}

Var GradientTape::matmul(Var a, Var b) {
  check_var(a, nodes_.size(), "matmul");
  check_var(b, nodes_.size(), "matmul");
  Tensor y = ops::matmul(val(a), val(b));
  return push(std::move(y), [a, b](GradientTape& t, const Tensor& up) {
    t.accumulate(a, ops::matmul_nt(up, t.val(b)));
    t.accumulate(b, ops::matmul_tn(t.val(a), up));
  });
}

Var GradientTape::linear(Var x, Var w, Var bias, std::vector<uint8_t> visible) {
  check_var(x, nodes_.size(), "linear");
  check_var(w, nodes_.size(), "linear");
  check_var(bias, nodes_.size(), "linear");
  Tensor w_eff = ops::select_visible(val(w), visible);
  Tensor y = ops::linear(val(x), w_eff, val(bias));
  return push(std::move(y),
              [x, w, bias, w_eff = std::move(w_eff), visible = std::move(visible)](GradientTape& t, const Tensor& up) {
                t.accumulate(x, ops::matmul(up, w_eff));
                Tensor dw = ops::matmul_tn(up, t.val(x));
                if (!visible.empty()) {
                  float* d = dw.data();
                  for (int64_t i = 0; i < dw.size(); ++i) {
                    if (!visible[static_cast<size_t>(i)]) d[i] = 0.f;
                  }
                }
                t.accumulate(w, dw);
                t.accumulate(bias, ops::col_sums(up));
              });
}

Var GradientTape::relu(Var x) {
  check_var(x, nodes_.size(), "relu");
  Tensor y = ops::relu(val(x));
  Var self{static_cast<int32_t>(nodes_.size())};
  return push(std::move(y), [x, self](GradientTape& t, const Tensor& up) {
    const Tensor& y_val = t.val(self);
    Tensor dx(y_val.shape());
    const float* yv = y_val.data();
    const float* u = up.data();
    float* d = dx.data();
    for (int64_t i = 0; i < dx.size(); ++i) d[i] = yv[i] > 0.f ? u[i] : 0.f;
    t.accumulate(x, dx);
  });
}

Var GradientTape::sum(Var x) {
  check_var(x, nodes_.size(), "sum");
  double s = 0.0;
  for (float v : val(x).values()) s += v;
  Tensor y = Tensor::scalar(static_cast<float>(s));
  y.require_finite("sum");
  return push(std::move(y), [x](GradientTape& t, const Tensor& up) {
    t.accumulate(x, Tensor::full(t.val(x).shape(), up.item()));
  });
}

Var GradientTape::add(Var a, Var b) {
  check_var(a, nodes_.size(), "add");
  check_var(b, nodes_.size(), "add");
  const Tensor& av = val(a);
  const Tensor& bv = val(b);
  if (!av.same_shape(bv)) throw TensorError("add: shape mismatch");
  Tensor y(av.shape());
  for (int64_t i = 0; i < y.size(); ++i) y[i] = av[i] + bv[i];
  y.require_finite("add");
  return push(std::move(y), [a, b](GradientTape& t, const Tensor& up) {
    t.accumulate(a, up);
    t.accumulate(b, up);
  });
}

Var GradientTape::scale(Var a, float s) {
  check_var(a, nodes_.size(), "scale");
  const Tensor& av = val(a);
  Tensor y(av.shape());
  for (int64_t i = 0; i < y.size(); ++i) y[i] = av[i] * s;
  y.require_finite("scale");
  return push(std::move(y), [a, s](GradientTape& t, const Tensor& up) {
    Tensor d(up.shape());
    for (int64_t i = 0; i < d.size(); ++i) d[i] = up[i] * s;
    t.accumulate(a, d);
  });
}

Var GradientTape::mse(Var pred, Var target) {
  check_var(pred, nodes_.size(), "mse");
  check_var(target, nodes_.size(), "mse");
  float loss = ops::mse(val(target), val(pred));
  return push(Tensor::scalar(loss), [pred, target](GradientTape& t, const Tensor& up) {
    const Tensor& p = t.val(pred);
    const Tensor& y = t.val(target);
    const float c = up.item() * 2.f / static_cast<float>(p.size());
    Tensor dp(p.shape());
    for (int64_t i = 0; i < p.size(); ++i) dp[i] = c * (p[i] - y[i]);
    t.accumulate(pred, dp);
    Tensor dt(p.shape());
    for (int64_t i = 0; i < p.size(); ++i) dt[i] = -dp[i];
    t.accumulate(target, dt);
  });
}

Var GradientTape::cross_entropy(Var logits, const std::vector<int>& labels) {
  check_var(logits, nodes_.size(), "cross_entropy");
  Tensor softmax;
  float loss = ops::cross_entropy(val(logits), labels, &softmax);
  return push(Tensor::scalar(loss),
              [logits, labels, softmax = std::move(softmax)](GradientTape& t, const Tensor& up) {
                const int64_t n = softmax.rows();
                const int64_t c = softmax.cols();
                const float s = up.item() / static_cast<float>(n);
                Tensor d({n, c});
                for (int64_t i = 0; i < n; ++i) {
                  for (int64_t j = 0; j < c; ++j) {
                    float one_hot = labels[static_cast<size_t>(i)] == j ? 1.f : 0.f;
                    d(i, j) = s * (softmax(i, j) - one_hot);
                  }
                }
                t.accumulate(logits, d);
              });
}

Var GradientTape::kl_standard_normal(Var mu, Var log_var) {
  check_var(mu, nodes_.size(), "kl_standard_normal");
  check_var(log_var, nodes_.size(), "kl_standard_normal");
  float loss = ops::kl_standard_normal(val(mu), val(log_var));
  return push(Tensor::scalar(loss), [mu, log_var](GradientTape& t, const Tensor& up) {
    const Tensor& m = t.val(mu);
    const Tensor& lv = t.val(log_var);
    const int64_t rows = m.rank() == 2 ? m.rows() : 1;
    const float s = up.item() / static_cast<float>(rows);
    Tensor dm(m.shape());
    Tensor dl(m.shape());
    for (int64_t i = 0; i < m.size(); ++i) {
      dm[i] = s * m[i];
      dl[i] = s * 0.5f * (std::exp(lv[i]) - 1.f);
    }
    t.accumulate(mu, dm);
    t.accumulate(log_var, dl);
  });
}

Var GradientTape::reparameterize(Var mu, Var log_var, const Tensor& noise) {
  check_var(mu, nodes_.size(), "reparameterize");
  check_var(log_var, nodes_.size(), "reparameterize");
  Tensor z = ops::reparameterize(val(mu), val(log_var), noise);
  return push(std::move(z), [mu, log_var, noise](GradientTape& t, const Tensor& up) {
    t.accumulate(mu, up);
    const Tensor& lv = t.val(log_var);
    Tensor dl(lv.shape());
    for (int64_t i = 0; i < lv.size(); ++i) {
      dl[i] = up[i] * 0.5f * std::exp(lv[i] * 0.5f) * noise[i];
    }
    t.accumulate(log_var, dl);
  });
}

void GradientTape::backward(Var loss) {
  check_var(loss, nodes_.size(), "backward");
  if (consumed_) throw TensorError("backward: tape already consumed");
  if (val(loss).size() != 1) {
    throw TensorError("backward: loss must be a scalar, got " + shape_str(val(loss).shape()));
  }
  consumed_ = true;
  grads_.assign(nodes_.size(), Tensor{});
  grads_[static_cast<size_t>(loss.id)] = Tensor::scalar(1.f);
  for (int32_t i = loss.id; i >= 0; --i) {
    const Node& node = nodes_[static_cast<size_t>(i)];
    const Tensor& g = grads_[static_cast<size_t>(i)];
    if (!g.empty() && node.back) node.back(*this, g);
  }
}

Tensor GradientTape::grad(Var v) const {
  check_var(v, nodes_.size(), "grad");
  if (!consumed_) throw TensorError("grad: backward has not run");
  const Tensor& g = grads_[static_cast<size_t>(v.id)];
  if (g.empty()) return Tensor::zeros_like(nodes_[static_cast<size_t>(v.id)].value);
  return g;
}

}  // namespace surprisenet
