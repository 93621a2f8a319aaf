#include "surprisenet/inference.hpp"

#include <string>

namespace surprisenet {

std::vector<InferenceResult> infer(const HybridModel& model, const Tensor& x,
                                   const Scenario& scenario) {
  const int n_tasks = scenario.task_count();
  if (n_tasks == 0) throw DataError("infer: scenario has no tasks");
  if (model.registry().current_task < n_tasks) {
    throw DataError("infer: scenario spans " + std::to_string(n_tasks) + " tasks but only " +
                    std::to_string(model.registry().current_task) + " are frozen");
  }
  const int64_t n = x.rows();

  // One batched forward per task subset; per-instance scores keep inference
  // independent of batch composition.
  std::vector<ForwardResult> per_task(static_cast<size_t>(n_tasks));
  for (int k = 0; k < n_tasks; ++k) {
    per_task[static_cast<size_t>(k)] = model.forward(x, k, Phase::Evaluate);
  }

  std::vector<InferenceResult> results(static_cast<size_t>(n));
  const int64_t class_count = model.config().class_count;
  for (int64_t i = 0; i < n; ++i) {
    InferenceResult& r = results[static_cast<size_t>(i)];
    r.per_task_rec_loss.resize(static_cast<size_t>(n_tasks));
    int best = 0;
    for (int k = 0; k < n_tasks; ++k) {
      const float loss = per_task[static_cast<size_t>(k)].per_instance_rec_loss[static_cast<size_t>(i)];
      r.per_task_rec_loss[static_cast<size_t>(k)] = loss;
      if (loss < r.per_task_rec_loss[static_cast<size_t>(best)]) best = k;
    }
    r.predicted_task = best;

    const Tensor& logits = per_task[static_cast<size_t>(best)].logits;
    r.logits_of_chosen.resize(static_cast<size_t>(class_count));
    for (int64_t c = 0; c < class_count; ++c) {
      r.logits_of_chosen[static_cast<size_t>(c)] = logits(i, c);
    }

    // Argmax restricted to the chosen task's classes; first-wins tie-break in
    // head order for determinism.
    const std::vector<int>& classes = scenario.classes_of(best);
    int best_label = -1;
    float best_logit = 0.f;
    for (int label : classes) {
      const float logit = logits(i, scenario.head_index(label));
      if (best_label < 0 || logit > best_logit) {
        best_label = label;
        best_logit = logit;
      }
    }
    r.predicted_class = best_label;
  }
  return results;
}

double task_id_accuracy(const std::vector<InferenceResult>& results,
                        const std::vector<int>& ground_truth_tasks) {
  if (results.size() != ground_truth_tasks.size()) {
    throw DataError("task_id_accuracy: " + std::to_string(results.size()) + " results vs " +
                    std::to_string(ground_truth_tasks.size()) + " ground-truth tasks");
  }
  if (results.empty()) throw DataError("task_id_accuracy: no results");
  int64_t correct = 0;
  for (size_t i = 0; i < results.size(); ++i) {
    if (results[i].predicted_task == ground_truth_tasks[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(results.size());
}

}  // namespace surprisenet
