#include "surprisenet/serialize.hpp"

namespace surprisenet {

json model_config_to_json(const ModelConfig& cfg) {
  return json{{"input_dim", cfg.input_dim},   {"hidden_dims", cfg.hidden_dims},
              {"latent_dim", cfg.latent_dim}, {"class_count", cfg.class_count},
              {"variant", variant_name(cfg.variant)}, {"kl_weight", cfg.kl_weight}};
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig cfg;
  cfg.input_dim = j.at("input_dim").get<int64_t>();
  cfg.hidden_dims = j.at("hidden_dims").get<std::vector<int64_t>>();
  cfg.latent_dim = j.at("latent_dim").get<int64_t>();
  cfg.class_count = j.at("class_count").get<int64_t>();
  cfg.variant = variant_from_name(j.at("variant").get<std::string>());
  cfg.kl_weight = j.at("kl_weight").get<float>();
  cfg.validate();
  return cfg;
}

json plan_to_json(const TrainPlan& plan) {
  return json{{"epochs_per_task", plan.epochs_per_task},
              {"retrain_epochs", plan.resolved_retrain_epochs()},
              {"prune_schedule", plan.schedule.to_string()},
              {"learning_rate", plan.learning_rate},
              {"batch_size", plan.batch_size},
              {"seed", plan.seed}};
}

TrainPlan plan_from_json(const json& j) {
  TrainPlan plan;
  plan.epochs_per_task = j.at("epochs_per_task").get<int>();
  plan.retrain_epochs = j.at("retrain_epochs").get<int>();
  plan.schedule = PruneSchedule::parse(j.at("prune_schedule").get<std::string>());
  plan.learning_rate = j.at("learning_rate").get<float>();
  plan.batch_size = j.at("batch_size").get<int>();
  plan.seed = j.at("seed").get<uint64_t>();
  plan.validate();
  return plan;
}

json scenario_to_json(const Scenario& scenario) {
  return json{{"task_classes", scenario.task_classes},
              {"class_order_seed", scenario.class_order_seed},
              {"dataset", scenario.dataset ? scenario.dataset->name : ""}};
}

}  // namespace surprisenet
