#pragma once

#include "surprisenet/report.hpp"

namespace surprisenet {

// Sequential training with no continual-learning mechanism: one unmasked
// model, same architecture and per-task budget (train + retrain epochs as
// plain epochs), prediction by global argmax over all classes seen so far.
// The expected behavior is collapse toward the last task's classes.
RunReport naive_baseline(const Scenario& scenario, const ModelConfig& config,
                         const TrainPlan& plan);

// Non-continual upper reference: every class trained simultaneously as a
// single task (the masked pipeline degenerates to plain training under a
// one-task schedule that prunes nothing).
RunReport joint_baseline(const Dataset& dataset, const ModelConfig& config, const TrainPlan& plan);

}  // namespace surprisenet
