#include "surprisenet/masked.hpp"

#include <algorithm>
#include <cmath>

#include "surprisenet/ops.hpp"

namespace surprisenet {

MaskedLinearLayer::MaskedLinearLayer(int64_t in_dim, int64_t out_dim)
    : in_(in_dim),
      out_(out_dim),
      weights_({out_dim, in_dim}),
      assign_(static_cast<size_t>(in_dim * out_dim), kFree),
      live_bias_({out_dim}) {
  if (in_dim <= 0 || out_dim <= 0) throw TensorError("MaskedLinearLayer: dimensions must be positive");
}

const Tensor& MaskedLinearLayer::bias_snapshot(TaskId k) const {
  if (k < 0 || k >= snapshot_count()) {
    throw TensorError("bias_snapshot: task " + std::to_string(k) + " has no snapshot");
  }
  return bias_snapshots_[static_cast<size_t>(k)];
}

std::vector<uint8_t> MaskedLinearLayer::visibility(TaskId k, Phase phase) const {
  if (phase == Phase::Full) return {};
  std::vector<uint8_t> vis(assign_.size(), 0);
  const bool include_free = phase == Phase::Train;
  const uint8_t limit = static_cast<uint8_t>(k);
  for (size_t i = 0; i < assign_.size(); ++i) {
    const uint8_t a = assign_[i];
    vis[i] = (a != kFree && a <= limit) || (include_free && a == kFree) ? 1 : 0;
  }
  return vis;
}

const Tensor& MaskedLinearLayer::bias_for(TaskId k, Phase phase) const {
  if (phase == Phase::Full || phase == Phase::Train || phase == Phase::Retrain) return live_bias_;
  return k < snapshot_count() ? bias_snapshot(k) : live_bias_;
}

Tensor MaskedLinearLayer::forward_visible(const Tensor& x, TaskId k, const TaskRegistry& reg, Phase phase) const {
  if (phase != Phase::Full && k > reg.current_task) {
    throw TensorError("forward_visible: visibility " + std::to_string(k) + " exceeds current task " +
                      std::to_string(reg.current_task));
  }
  Tensor w_eff = ops::select_visible(weights_, visibility(k, phase));
  return ops::linear(x, w_eff, bias_for(k, phase));
}

Var MaskedLinearLayer::forward_visible(GradientTape& tape, Var x, TaskId k, Phase phase, const TaskRegistry& reg,
                                       Var& w_var, Var& b_var) const {
  if (phase != Phase::Full && k > reg.current_task) {
    throw TensorError("forward_visible: visibility " + std::to_string(k) + " exceeds current task " +
                      std::to_string(reg.current_task));
  }
  w_var = tape.watch(weights_);
  b_var = tape.watch(bias_for(k, phase));
  return tape.linear(x, w_var, b_var, visibility(k, phase));
}

void MaskedLinearLayer::gate_gradients(Tensor& weight_grad, TaskId current_task) const {
  if (weight_grad.size() != weight_count()) throw TensorError("gate_gradients: gradient shape mismatch");
  float* g = weight_grad.data();
  for (size_t i = 0; i < assign_.size(); ++i) {
    const uint8_t a = assign_[i];
    if (a != kFree && static_cast<TaskId>(a) < current_task) g[i] = 0.f;
  }
}

int64_t prune_count(double lambda, int64_t candidates) {
  return static_cast<int64_t>(std::floor(lambda * static_cast<double>(candidates) + 1e-9));
}

int64_t MaskedLinearLayer::prune(double lambda, TaskId current_task) {
  if (lambda < 0.0 || lambda > 1.0) {
    throw TensorError("prune: lambda " + std::to_string(lambda) + " outside [0, 1]");
  }
  if (current_task > kMaxTasks) throw TensorError("prune: task id exceeds assignment-map range");
  std::vector<int64_t> candidates;
  for (size_t i = 0; i < assign_.size(); ++i) {
    if (assign_[i] == kFree) candidates.push_back(static_cast<int64_t>(i));
  }
  const int64_t n_prune = prune_count(lambda, static_cast<int64_t>(candidates.size()));
  std::sort(candidates.begin(), candidates.end(), [this](int64_t a, int64_t b) {
    const float ma = std::fabs(weights_[a]);
    const float mb = std::fabs(weights_[b]);
    return ma != mb ? ma < mb : a < b;
  });
  for (int64_t i = 0; i < static_cast<int64_t>(candidates.size()); ++i) {
    const int64_t idx = candidates[static_cast<size_t>(i)];
    if (i < n_prune) {
      weights_[idx] = 0.f;  // stays free
    } else {
      assign_[static_cast<size_t>(idx)] = static_cast<uint8_t>(current_task);
    }
  }
  return n_prune;
}

void MaskedLinearLayer::init_free_weights(Rng& rng) {
  const float a = std::sqrt(6.f / static_cast<float>(in_ + out_));
  for (size_t i = 0; i < assign_.size(); ++i) {
    if (assign_[i] == kFree) weights_[static_cast<int64_t>(i)] = rng.uniform(-a, a);
  }
}

int64_t MaskedLinearLayer::count_assigned(TaskId k) const {
  int64_t n = 0;
  for (uint8_t a : assign_) {
    if (a != kFree && static_cast<TaskId>(a) == k) ++n;
  }
  return n;
}

int64_t MaskedLinearLayer::count_free() const {
  int64_t n = 0;
  for (uint8_t a : assign_) {
    if (a == kFree) ++n;
  }
  return n;
}

std::vector<int64_t> MaskedLinearLayer::assignment_counts(int total_tasks) const {
  std::vector<int64_t> counts(static_cast<size_t>(total_tasks) + 1, 0);
  for (uint8_t a : assign_) {
    if (a == kFree) {
      counts.back() += 1;
    } else if (static_cast<int>(a) < total_tasks) {
      counts[a] += 1;
    } else {
      throw TensorError("assignment_counts: weight assigned to unknown task " + std::to_string(int(a)));
    }
  }
  return counts;
}

double eqprune_lambda(int task_position, int total_tasks) {
  if (task_position < 1 || task_position > total_tasks) {
    throw TensorError("eqprune_lambda: task position " + std::to_string(task_position) + " outside [1, " +
                      std::to_string(total_tasks) + "]");
  }
  const int remaining = total_tasks - task_position;
  return static_cast<double>(remaining) / static_cast<double>(remaining + 1);
}

void freeze_current(TaskRegistry& reg, const std::vector<MaskedLinearLayer*>& layers) {
  if (!reg.trained_since_freeze) {
    throw TensorError("freeze_current: no training has happened since the last freeze");
  }
  for (MaskedLinearLayer* layer : layers) {
    if (layer->snapshot_count() != reg.current_task) {
      throw TensorError("freeze_current: snapshot count out of step with registry");
    }
    layer->snapshot_bias();
  }
  reg.current_task += 1;
  reg.trained_since_freeze = false;
}

}  // namespace surprisenet
