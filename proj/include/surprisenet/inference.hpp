#pragma once

#include <vector>

#include "surprisenet/data.hpp"
#include "surprisenet/model.hpp"

namespace surprisenet {

// One instance's task-free prediction. predicted_class is an original dataset
// label id and always lies inside predicted_task's class set.
struct InferenceResult {
  TaskId predicted_task = -1;
  int predicted_class = -1;
  std::vector<float> per_task_rec_loss;  // one entry per scenario task
  std::vector<float> logits_of_chosen;   // full head row under the chosen subset
};

// Class-IL prediction without task labels: forward every instance under each
// frozen task-specific subset, pick the subset with the lowest per-instance
// reconstruction error (lowest task index on ties), then classify restricted
// to that task's classes. Pure: identical inputs give identical outputs.
// Requires every scenario task to be frozen already.
std::vector<InferenceResult> infer(const HybridModel& model, const Tensor& x,
                                   const Scenario& scenario);

// Fraction of instances whose predicted task matches the ground truth.
double task_id_accuracy(const std::vector<InferenceResult>& results,
                        const std::vector<int>& ground_truth_tasks);

}  // namespace surprisenet
