#include "surprisenet/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

namespace surprisenet {

namespace {

// Global-argmax prediction over the heads seen so far (no task inference).
// The predicted task is derived from the predicted class, so a correct class
// still implies a correct task and the chain inequality holds for baselines.
EvalResult naive_eval(const HybridModel& model, const Scenario& scenario, const Partition& test,
                      int seen_heads) {
  const ForwardResult fwd = model.forward(test.features, 0, Phase::Full);
  int64_t class_correct = 0;
  int64_t task_correct = 0;
  for (int64_t i = 0; i < test.size(); ++i) {
    int best_head = 0;
    for (int h = 1; h < seen_heads; ++h) {
      if (fwd.logits(i, h) > fwd.logits(i, best_head)) best_head = h;
    }
    const int label = scenario.label_at_head(best_head);
    const int task = scenario.task_of_label(label);
    const int truth = test.labels[static_cast<size_t>(i)];
    if (label == truth) ++class_correct;
    if (task == scenario.task_of_label(truth)) ++task_correct;
  }
  EvalResult out;
  out.instance_count = test.size();
  out.class_il_accuracy = static_cast<double>(class_correct) / static_cast<double>(test.size());
  out.task_id_accuracy = static_cast<double>(task_correct) / static_cast<double>(test.size());
  return out;
}

RunReport assemble(const Scenario& scenario, const ModelConfig& config, const TrainPlan& plan,
                   const char* kind, std::vector<TaskLog> logs, AccuracyMatrix matrix) {
  RunReport report;
  report.config = json{{"kind", kind},
                       {"model", model_config_to_json(config)},
                       {"plan", plan_to_json(plan)},
                       {"scenario", scenario_to_json(scenario)}};
  report.dataset = scenario.dataset->name;
  report.variant = std::string(kind) + "-" + variant_name(config.variant);
  report.schedule = plan.schedule.to_string();
  report.seed = plan.seed;
  report.final_accuracy = matrix.overall.back();
  report.final_task_id_accuracy = matrix.task_id.back();
  report.matrix = std::move(matrix);
  report.task_logs = std::move(logs);
  return report;
}

}  // namespace

RunReport naive_baseline(const Scenario& scenario, const ModelConfig& config,
                         const TrainPlan& plan) {
  scenario.validate();
  plan.validate();
  if (config.class_count < scenario.total_classes()) {
    throw TrainError("model head has " + std::to_string(config.class_count) +
                     " classes, scenario needs " + std::to_string(scenario.total_classes()));
  }

  HybridModel model(config, std::max(1, scenario.task_count()));
  Rng init_rng = Rng::derive(plan.seed, "init/task0");
  model.init_free_parameters(init_rng);

  ContinualTrainer trainer(model, plan);
  // Budget parity with the masked pipeline: train + retrain epochs, as plain
  // epochs (there is no prune boundary to split them across).
  const int epochs = plan.epochs_per_task + plan.resolved_retrain_epochs();

  const std::vector<MaskedLinearLayer*> layers = model.layers();
  const std::vector<std::string>& names = model.layer_names();

  std::vector<TaskLog> logs;
  AccuracyMatrix matrix;
  int seen_heads = 0;
  for (int t = 0; t < scenario.task_count(); ++t) {
    const auto t0 = std::chrono::steady_clock::now();
    TaskLog log;
    log.task = t;
    // Cross-entropy only: the reconstruction head is part of the continual-
    // learning mechanism this baseline exists to go without.
    log.train_epochs = trainer.train_unmasked(scenario.train_split(t), scenario, t, epochs,
                                              TrainObjective::ClassifierOnly);
    log.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (size_t li = 0; li < layers.size(); ++li) {
      const int64_t free = layers[li]->count_free();
      log.free_after_per_layer[names[li]] = free;
      log.free_after_total += free;
    }
    logs.push_back(std::move(log));

    seen_heads += static_cast<int>(scenario.classes_of(t).size());
    std::vector<double> row;
    for (int u = 0; u <= t; ++u) {
      row.push_back(naive_eval(model, scenario, scenario.test_split(u), seen_heads).class_il_accuracy);
    }
    const EvalResult joint = naive_eval(model, scenario, scenario.test_union(t), seen_heads);
    matrix.class_il.push_back(std::move(row));
    matrix.task_id.push_back(joint.task_id_accuracy);
    matrix.overall.push_back(joint.class_il_accuracy);
  }
  matrix.validate();
  return assemble(scenario, config, plan, "naive", std::move(logs), std::move(matrix));
}

RunReport joint_baseline(const Dataset& dataset, const ModelConfig& config, const TrainPlan& plan) {
  plan.validate();
  if (config.class_count < dataset.class_count) {
    throw TrainError("model head has " + std::to_string(config.class_count) +
                     " classes, dataset has " + std::to_string(dataset.class_count));
  }

  // Single task over every class (ascending ids). Under a one-task, prune-
  // nothing schedule the masked pipeline reduces to plain joint training.
  Scenario scenario;
  scenario.dataset = &dataset;
  scenario.class_order_seed = plan.seed;
  std::vector<int> all(static_cast<size_t>(dataset.class_count));
  std::iota(all.begin(), all.end(), 0);
  scenario.task_classes = {std::move(all)};
  scenario.validate();

  TrainPlan joint_plan = plan;
  joint_plan.schedule = PruneSchedule::fixed(0.0);

  HybridModel model(config, 1);
  ContinualTrainer trainer(model, joint_plan);
  auto [logs, matrix] = trainer.run_scenario(scenario);
  return assemble(scenario, config, joint_plan, "joint", std::move(logs), std::move(matrix));
}

}  // namespace surprisenet
