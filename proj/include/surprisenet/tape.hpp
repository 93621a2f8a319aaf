#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "surprisenet/tensor.hpp"

namespace surprisenet {

// Handle to a tensor recorded on a GradientTape.
struct Var {
  int32_t id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode tape. Records one node per executed operation together with
// the saved state its local derivative needs, then replays in reverse.
// A tape lives for exactly one optimization step: backward() may run once.
class GradientTape {
 public:
  GradientTape() = default;
  GradientTape(const GradientTape&) = delete;
  GradientTape& operator=(const GradientTape&) = delete;

  // Leaves. Both are recorded identically; watch() marks parameters whose
  // gradients the caller intends to read.
  Var watch(const Tensor& param);
  Var constant(const Tensor& value);

  Var matmul(Var a, Var b);
  // y = x * select(visible, w)^T + bias. Empty mask means unmasked. The
  // weight gradient is zeroed where visible == 0.
  Var linear(Var x, Var w, Var bias, std::vector<uint8_t> visible);
  Var relu(Var x);
  Var sum(Var x);
  Var add(Var a, Var b);
  Var scale(Var a, float s);
  Var mse(Var pred, Var target);
  Var cross_entropy(Var logits, const std::vector<int>& labels);
  Var kl_standard_normal(Var mu, Var log_var);
  Var reparameterize(Var mu, Var log_var, const Tensor& noise);

  const Tensor& value(Var v) const;
  // Runs reverse accumulation from a scalar loss. Throws if already consumed.
  void backward(Var loss);
  // Gradient w.r.t. a recorded tensor; all-zeros if the loss never reached it.
  Tensor grad(Var v) const;
  bool consumed() const { return consumed_; }
  size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    std::function<void(GradientTape&, const Tensor& upstream)> back;
  };

  Var push(Tensor value, std::function<void(GradientTape&, const Tensor&)> back);
  void accumulate(Var v, const Tensor& g);
  const Tensor& val(Var v) const { return nodes_[static_cast<size_t>(v.id)].value; }

  std::vector<Node> nodes_;
  std::vector<Tensor> grads_;
  bool consumed_ = false;
};

}  // namespace surprisenet
