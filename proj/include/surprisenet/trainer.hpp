#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "surprisenet/adam.hpp"
#include "surprisenet/data.hpp"
#include "surprisenet/metrics.hpp"
#include "surprisenet/model.hpp"

namespace surprisenet {

class TrainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ScheduleKind { Fixed, EqPrune };

// Prune proportion per task. Fixed releases the same fraction after every
// task; EqPrune allocates an equal share of total capacity to each of the
// T planned tasks (lambda_t = (T-t)/(T-t+1) for 1-based position t).
struct PruneSchedule {
  ScheduleKind kind = ScheduleKind::EqPrune;
  double fixed_lambda = 0.5;

  static PruneSchedule fixed(double lambda);
  static PruneSchedule eqprune();

  // "fixed:<lambda>" or "eqprune" (the CLI flag grammar).
  static PruneSchedule parse(const std::string& text);
  std::string to_string() const;

  // task is the 0-based scenario position.
  double lambda_for(int task, int total_tasks) const;
  void validate() const;
};

struct TrainPlan {
  int epochs_per_task = 10;
  int retrain_epochs = -1;  // -1 = default: ceil(epochs_per_task / 2)
  PruneSchedule schedule;
  float learning_rate = 1e-4f;
  int batch_size = 64;
  uint64_t seed = 1;

  int resolved_retrain_epochs() const;
  void validate() const;
};

// Mean loss components over one epoch.
struct EpochLog {
  double total = 0.0;
  double reconstruction = 0.0;
  double classification = 0.0;
  double kl = 0.0;
};

// What the optimizer minimizes. Hybrid is the full objective (reconstruction
// + classification, + weighted KL for the variational flavor); ClassifierOnly
// is plain cross-entropy fine-tuning — the conventional sequential baseline,
// which leaves the decoder untouched.
enum class TrainObjective { Hybrid, ClassifierOnly };

struct TaskLog {
  int task = -1;
  double lambda = 0.0;
  std::vector<EpochLog> train_epochs;
  std::vector<EpochLog> retrain_epochs;
  std::map<std::string, int64_t> pruned_per_layer;
  std::map<std::string, int64_t> free_after_per_layer;
  int64_t free_after_total = 0;  // capacity remaining; non-increasing across tasks
  double train_seconds = 0.0;
  double prune_seconds = 0.0;
  double retrain_seconds = 0.0;
};

// Per-task lifecycle: train on the task's classes, prune by the schedule's
// lambda, retrain the survivors, freeze; repeated until tasks are exhausted.
class ContinualTrainer {
 public:
  ContinualTrainer(HybridModel& model, TrainPlan plan);

  const TrainPlan& plan() const { return plan_; }

  // Runs the four phases for one task. task_data holds original label ids and
  // only this task's classes; the registry must already point at `task`.
  // Throws CapacityError if a layer has no free weights at task start and
  // NumericError (with task/phase context) on divergence.
  TaskLog train_task(const Partition& task_data, const Scenario& scenario, int task);

  // Trains every task in scenario order; after each freeze, evaluates the
  // test sets of all tasks seen so far. on_freeze (optional) runs right after
  // each task's freeze, before its evaluation — checkpoint hook.
  std::pair<std::vector<TaskLog>, AccuracyMatrix> run_scenario(
      const Scenario& scenario, const std::function<void(int, const TaskLog&)>& on_freeze = {});

  // Plain sequential training with masks ignored (the naive baseline): no
  // pruning, no freezing, no registry bookkeeping. `task` only names the
  // RNG streams so budgets and batch orders match the masked pipeline.
  std::vector<EpochLog> train_unmasked(const Partition& task_data, const Scenario& scenario,
                                       int task, int epochs,
                                       TrainObjective objective = TrainObjective::Hybrid);

 private:
  EpochLog run_epoch(const Partition& data, const std::vector<int>& head_labels, int task,
                     Phase phase, Rng& batch_rng, Rng& noise_rng, std::vector<AdamState>& w_states,
                     std::vector<AdamState>& b_states,
                     TrainObjective objective = TrainObjective::Hybrid);

  HybridModel& model_;
  TrainPlan plan_;
};

}  // namespace surprisenet
