#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "surprisenet/rng.hpp"
#include "surprisenet/tape.hpp"
#include "surprisenet/tensor.hpp"

namespace surprisenet {

using TaskId = int;

// Stored per weight in the assignment map; also the on-disk encoding.
inline constexpr uint8_t kFree = 255;
inline constexpr int kMaxTasks = 254;

// A layer ran out of unassigned weights before a new task could start.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Phase {
  Evaluate,  // frozen subset k: weights with assignment <= k, snapshot bias
  Train,     // current task, initial phase: free weights participate
  Retrain,   // current task, post-prune: surviving weights only
  Full,      // masking disabled (baselines): every weight, live bias
};

struct TaskRegistry {
  TaskId current_task = 0;
  int total_tasks_planned = 1;
  bool trained_since_freeze = false;
};

// Affine layer whose weights carry a per-weight task assignment. Weights
// assigned to a frozen task never change value again; unassigned (free)
// weights are the candidate pool for the task currently training.
class MaskedLinearLayer {
 public:
  MaskedLinearLayer(int64_t in_dim, int64_t out_dim);

  int64_t in_dim() const { return in_; }
  int64_t out_dim() const { return out_; }
  int64_t weight_count() const { return in_ * out_; }

  const Tensor& weights() const { return weights_; }
  Tensor& weights() { return weights_; }
  const std::vector<uint8_t>& assignment() const { return assign_; }
  std::vector<uint8_t>& assignment() { return assign_; }
  const Tensor& live_bias() const { return live_bias_; }
  Tensor& live_bias() { return live_bias_; }
  int snapshot_count() const { return static_cast<int>(bias_snapshots_.size()); }
  const Tensor& bias_snapshot(TaskId k) const;
  std::vector<Tensor>& bias_snapshots() { return bias_snapshots_; }

  // 0/1 participation mask for the given visibility; empty means all-visible.
  std::vector<uint8_t> visibility(TaskId k, Phase phase) const;
  const Tensor& bias_for(TaskId k, Phase phase) const;

  // Evaluation-mode affine pass at visibility k.
  Tensor forward_visible(const Tensor& x, TaskId k, const TaskRegistry& reg, Phase phase = Phase::Evaluate) const;
  // Training-mode pass; registers this layer's parameters on the tape and
  // reports their handles through w_var / b_var.
  Var forward_visible(GradientTape& tape, Var x, TaskId k, Phase phase, const TaskRegistry& reg, Var& w_var,
                      Var& b_var) const;

  // Zeroes weight-gradient entries owned by tasks before current_task.
  // Idempotent; the live bias gradient always passes through.
  void gate_gradients(Tensor& weight_grad, TaskId current_task) const;

  // Reassigns the floor(lambda * candidates) smallest-magnitude candidate
  // weights back to the free pool (zeroed); survivors now belong to
  // current_task. Ties break toward the lowest flat index. Returns the
  // number pruned.
  int64_t prune(double lambda, TaskId current_task);

  // Xavier-uniform re-draw of free weights; assigned weights are untouched.
  void init_free_weights(Rng& rng);

  void snapshot_bias() { bias_snapshots_.push_back(live_bias_); }

  int64_t count_assigned(TaskId k) const;
  int64_t count_free() const;
  // Counts per task 0..total_tasks-1 followed by the free count.
  std::vector<int64_t> assignment_counts(int total_tasks) const;

 private:
  int64_t in_ = 0;
  int64_t out_ = 0;
  Tensor weights_;                      // [out, in]
  std::vector<uint8_t> assign_;         // kFree or owning task id, per weight
  Tensor live_bias_;                    // [out]
  std::vector<Tensor> bias_snapshots_;  // index == frozen task id
};

// lambda_t = (T - t) / (T - t + 1) for 1-indexed task position t of T, so
// every task retains an equal share of layer capacity; the last task keeps
// everything still free.
double eqprune_lambda(int task_position, int total_tasks);

// Exact prune count for a candidate pool: floor with a nudge so that decimal
// proportions like 2/3 land on their intended rational value.
int64_t prune_count(double lambda, int64_t candidates);

// Marks the current task immutable: bias snapshots are taken, the task
// counter advances. Requires at least one completed training phase since the
// previous freeze.
void freeze_current(TaskRegistry& reg, const std::vector<MaskedLinearLayer*>& layers);

}  // namespace surprisenet
