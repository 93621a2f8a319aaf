#include "surprisenet/metrics.hpp"

#include <algorithm>
#include <string>

namespace surprisenet {

EvalResult evaluate(const HybridModel& model, const Scenario& scenario, const Partition& test) {
  test.validate();
  if (test.size() == 0) throw MetricsError("evaluate: empty test set");

  std::vector<int> truth_tasks(test.labels.size());
  for (size_t i = 0; i < test.labels.size(); ++i) {
    truth_tasks[i] = scenario.task_of_label(test.labels[i]);
  }

  const std::vector<InferenceResult> results = infer(model, test.features, scenario);

  int64_t class_correct = 0;
  int64_t task_correct = 0;
  for (size_t i = 0; i < results.size(); ++i) {
    const InferenceResult& r = results[i];

    const auto& classes = scenario.classes_of(r.predicted_task);
    if (std::find(classes.begin(), classes.end(), r.predicted_class) == classes.end()) {
      throw MetricsError("instance " + std::to_string(i) + ": predicted class " +
                         std::to_string(r.predicted_class) + " outside predicted task " +
                         std::to_string(r.predicted_task));
    }

    const bool class_ok = r.predicted_class == test.labels[i];
    const bool task_ok = r.predicted_task == truth_tasks[i];
    if (class_ok && !task_ok) {
      throw MetricsError("instance " + std::to_string(i) +
                         ": class correct but task wrong — restriction rule broken");
    }
    class_correct += class_ok ? 1 : 0;
    task_correct += task_ok ? 1 : 0;
  }

  EvalResult out;
  out.instance_count = static_cast<int64_t>(results.size());
  out.class_il_accuracy = static_cast<double>(class_correct) / static_cast<double>(out.instance_count);
  out.task_id_accuracy = static_cast<double>(task_correct) / static_cast<double>(out.instance_count);
  if (out.class_il_accuracy > out.task_id_accuracy) {
    throw MetricsError("class-IL accuracy exceeds task-ID accuracy — chain inequality broken");
  }
  return out;
}

void AccuracyMatrix::validate() const {
  const size_t t_count = class_il.size();
  if (task_id.size() != t_count || overall.size() != t_count) {
    throw MetricsError("accuracy matrix: series lengths disagree");
  }
  for (size_t t = 0; t < t_count; ++t) {
    if (class_il[t].size() != t + 1) {
      throw MetricsError("accuracy matrix: row " + std::to_string(t) + " has " +
                         std::to_string(class_il[t].size()) + " entries, expected " +
                         std::to_string(t + 1));
    }
    for (double a : class_il[t]) {
      if (a < 0.0 || a > 1.0) throw MetricsError("accuracy matrix: entry outside [0,1]");
    }
    if (task_id[t] < 0.0 || task_id[t] > 1.0 || overall[t] < 0.0 || overall[t] > 1.0) {
      throw MetricsError("accuracy matrix: entry outside [0,1]");
    }
  }
}

double final_accuracy(const HybridModel& model, const Scenario& scenario) {
  const int last = scenario.task_count() - 1;
  return evaluate(model, scenario, scenario.test_union(last)).class_il_accuracy;
}

}  // namespace surprisenet
