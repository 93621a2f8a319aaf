#pragma once

#include <stdexcept>
#include <vector>

#include "surprisenet/data.hpp"
#include "surprisenet/inference.hpp"
#include "surprisenet/model.hpp"

namespace surprisenet {

class MetricsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One evaluation pass over a labeled test set.
struct EvalResult {
  double class_il_accuracy = 0.0;  // predicted class == true class, no task labels given
  double task_id_accuracy = 0.0;   // predicted task == true task
  int64_t instance_count = 0;
};

// Evaluates `test` under task-free inference and re-asserts the structural
// guarantees on every instance: the predicted class lies in the predicted
// task's class set, and a correct class implies a correct task (so class-IL
// accuracy <= task-ID accuracy). Violations throw MetricsError.
EvalResult evaluate(const HybridModel& model, const Scenario& scenario, const Partition& test);

// Lower-triangular accuracy-over-time record. Row t is measured after
// training through task t.
struct AccuracyMatrix {
  std::vector<std::vector<double>> class_il;  // class_il[t][u], u <= t: accuracy on task u's test set
  std::vector<double> task_id;                // task-ID accuracy on the union test set after t
  std::vector<double> overall;                // class-IL accuracy on the union test set after t

  int task_count() const { return static_cast<int>(class_il.size()); }
  void validate() const;  // occupancy + [0,1] ranges
};

// Final class-IL accuracy: one pass over the union of all tasks' test sets
// with task-free inference, micro-averaged over instances.
double final_accuracy(const HybridModel& model, const Scenario& scenario);

}  // namespace surprisenet
