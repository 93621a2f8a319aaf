#include "surprisenet/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <numeric>

namespace surprisenet {

PruneSchedule PruneSchedule::fixed(double lambda) {
  PruneSchedule s;
  s.kind = ScheduleKind::Fixed;
  s.fixed_lambda = lambda;
  s.validate();
  return s;
}

PruneSchedule PruneSchedule::eqprune() {
  PruneSchedule s;
  s.kind = ScheduleKind::EqPrune;
  return s;
}

PruneSchedule PruneSchedule::parse(const std::string& text) {
  if (text == "eqprune") return eqprune();
  const std::string prefix = "fixed:";
  if (text.rfind(prefix, 0) == 0) {
    const std::string num = text.substr(prefix.size());
    try {
      size_t used = 0;
      const double lambda = std::stod(num, &used);
      if (used != num.size()) throw std::invalid_argument(num);
      return fixed(lambda);
    } catch (const std::logic_error&) {
      throw TrainError("bad prune proportion '" + num + "' (want e.g. fixed:0.5)");
    }
  }
  throw TrainError("unknown prune schedule '" + text + "' (want 'eqprune' or 'fixed:<lambda>')");
}

std::string PruneSchedule::to_string() const {
  if (kind == ScheduleKind::EqPrune) return "eqprune";
  // Trim trailing zeros for a stable, readable echo.
  std::string num = std::to_string(fixed_lambda);
  while (num.size() > 1 && num.back() == '0') num.pop_back();
  if (!num.empty() && num.back() == '.') num.pop_back();
  return "fixed:" + num;
}

double PruneSchedule::lambda_for(int task, int total_tasks) const {
  if (task < 0 || task >= total_tasks) {
    throw TrainError("task " + std::to_string(task) + " outside the planned 0.." +
                     std::to_string(total_tasks - 1));
  }
  if (kind == ScheduleKind::EqPrune) return eqprune_lambda(task + 1, total_tasks);
  return fixed_lambda;
}

void PruneSchedule::validate() const {
  if (kind == ScheduleKind::Fixed && (fixed_lambda < 0.0 || fixed_lambda >= 1.0)) {
    throw TrainError("fixed prune proportion must lie in [0, 1), got " +
                     std::to_string(fixed_lambda));
  }
}

int TrainPlan::resolved_retrain_epochs() const {
  return retrain_epochs < 0 ? (epochs_per_task + 1) / 2 : retrain_epochs;
}

void TrainPlan::validate() const {
  if (epochs_per_task < 1) throw TrainError("epochs_per_task must be >= 1");
  if (retrain_epochs < -1) throw TrainError("retrain_epochs must be >= 0 (-1 means the default)");
  if (!(learning_rate > 0.f)) throw TrainError("learning_rate must be positive");
  if (batch_size < 1) throw TrainError("batch_size must be >= 1");
  schedule.validate();
}

ContinualTrainer::ContinualTrainer(HybridModel& model, TrainPlan plan)
    : model_(model), plan_(std::move(plan)) {
  plan_.validate();
}

EpochLog ContinualTrainer::run_epoch(const Partition& data, const std::vector<int>& head_labels,
                                     int task, Phase phase, Rng& batch_rng, Rng& noise_rng,
                                     std::vector<AdamState>& w_states,
                                     std::vector<AdamState>& b_states, TrainObjective objective) {
  const int64_t n = data.size();
  const int64_t d = data.dim();
  const int64_t batch = std::min<int64_t>(plan_.batch_size, n);
  const bool vae = model_.config().variant == Variant::VAE;
  const int64_t latent = model_.config().latent_dim;

  std::vector<int64_t> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  batch_rng.shuffle(order);

  std::vector<MaskedLinearLayer*> layers = model_.layers();
  AdamConfig adam_cfg;
  adam_cfg.learning_rate = plan_.learning_rate;

  EpochLog log;
  for (int64_t start = 0; start < n; start += batch) {
    const int64_t b = std::min(batch, n - start);
    Tensor x({b, d});
    std::vector<int> labels(static_cast<size_t>(b));
    for (int64_t i = 0; i < b; ++i) {
      const int64_t row = order[static_cast<size_t>(start + i)];
      std::memcpy(x.data() + i * d, data.features.data() + row * d,
                  static_cast<size_t>(d) * sizeof(float));
      labels[static_cast<size_t>(i)] = head_labels[static_cast<size_t>(row)];
    }

    Tensor noise;
    const Tensor* noise_ptr = nullptr;
    if (vae) {
      noise = Tensor({b, latent});
      for (int64_t i = 0; i < noise.size(); ++i) noise[i] = noise_rng.normal();
      noise_ptr = &noise;
    }

    GradientTape tape;
    const TrainForward fwd = model_.forward_train(tape, x, task, phase, noise_ptr);
    const LossBreakdown loss = objective == TrainObjective::Hybrid
                                   ? model_.training_loss(tape, fwd, labels)
                                   : model_.classification_loss(tape, fwd, labels);
    tape.backward(loss.total_var);

    if (fwd.params.size() != layers.size()) {
      throw TrainError("forward pass touched " + std::to_string(fwd.params.size()) +
                       " layers, model has " + std::to_string(layers.size()));
    }
    for (size_t li = 0; li < layers.size(); ++li) {
      if (fwd.params[li].layer != layers[li]) {
        throw TrainError("layer order mismatch between forward pass and model");
      }
      Tensor gw = tape.grad(fwd.params[li].w);
      layers[li]->gate_gradients(gw, task);
      adam_step(layers[li]->weights(), gw, w_states[li], adam_cfg);

      const Tensor gb = tape.grad(fwd.params[li].b);
      adam_step(layers[li]->live_bias(), gb, b_states[li], adam_cfg);
    }

    const double w = static_cast<double>(b);
    log.total += w * loss.total;
    log.reconstruction += w * loss.reconstruction;
    log.classification += w * loss.classification;
    log.kl += w * loss.kl;
  }

  const double dn = static_cast<double>(n);
  log.total /= dn;
  log.reconstruction /= dn;
  log.classification /= dn;
  log.kl /= dn;
  return log;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

TaskLog ContinualTrainer::train_task(const Partition& task_data, const Scenario& scenario,
                                     int task) {
  task_data.validate();
  TaskRegistry& reg = model_.registry();
  if (reg.current_task != task) {
    throw TrainError("registry points at task " + std::to_string(reg.current_task) +
                     ", asked to train task " + std::to_string(task));
  }
  if (task >= reg.total_tasks_planned) {
    throw TrainError("task " + std::to_string(task) + " exceeds the planned " +
                     std::to_string(reg.total_tasks_planned) + " tasks");
  }
  if (task_data.size() == 0) throw TrainError("task " + std::to_string(task) + " has no training data");
  if (task_data.dim() != model_.config().input_dim) {
    throw TrainError("task data dim " + std::to_string(task_data.dim()) + " != model input dim " +
                     std::to_string(model_.config().input_dim));
  }

  const std::vector<int>& classes = scenario.classes_of(task);
  std::vector<int> head_labels(task_data.labels.size());
  for (size_t i = 0; i < task_data.labels.size(); ++i) {
    const int label = task_data.labels[i];
    if (std::find(classes.begin(), classes.end(), label) == classes.end()) {
      throw TrainError("instance with label " + std::to_string(label) +
                       " does not belong to task " + std::to_string(task));
    }
    head_labels[i] = scenario.head_index(label);
  }

  std::vector<MaskedLinearLayer*> layers = model_.layers();
  const std::vector<std::string>& names = model_.layer_names();
  for (size_t li = 0; li < layers.size(); ++li) {
    if (layers[li]->count_free() == 0) {
      throw CapacityError("layer '" + names[li] + "' has no free weights at the start of task " +
                          std::to_string(task));
    }
  }

  const std::string task_tag = std::to_string(task);
  Rng init_rng = Rng::derive(plan_.seed, "init/task" + task_tag);
  Rng batch_rng = Rng::derive(plan_.seed, "batch/task" + task_tag);
  Rng noise_rng = Rng::derive(plan_.seed, "noise/task" + task_tag);

  model_.init_free_parameters(init_rng);
  reg.trained_since_freeze = true;

  TaskLog log;
  log.task = task;

  // Phase 1: train everything that is not frozen (free weights + live bias).
  try {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<AdamState> w_states(layers.size());
    std::vector<AdamState> b_states(layers.size());
    for (int e = 0; e < plan_.epochs_per_task; ++e) {
      log.train_epochs.push_back(
          run_epoch(task_data, head_labels, task, Phase::Train, batch_rng, noise_rng, w_states, b_states));
    }
    log.train_seconds = seconds_since(t0);

    // Phase 2: release the lowest-magnitude fraction of this task's weights
    // back to the free pool; survivors are assigned to this task.
    const auto t1 = std::chrono::steady_clock::now();
    log.lambda = plan_.schedule.lambda_for(task, reg.total_tasks_planned);
    for (size_t li = 0; li < layers.size(); ++li) {
      log.pruned_per_layer[names[li]] = layers[li]->prune(log.lambda, task);
    }
    log.prune_seconds = seconds_since(t1);

    // Phase 3: retrain survivors only; fresh optimizer state (the old moments
    // reference weights that were just pruned).
    const auto t2 = std::chrono::steady_clock::now();
    std::vector<AdamState> rw_states(layers.size());
    std::vector<AdamState> rb_states(layers.size());
    for (int e = 0; e < plan_.resolved_retrain_epochs(); ++e) {
      log.retrain_epochs.push_back(run_epoch(task_data, head_labels, task, Phase::Retrain,
                                             batch_rng, noise_rng, rw_states, rb_states));
    }
    log.retrain_seconds = seconds_since(t2);
  } catch (const NumericError& e) {
    throw NumericError("training diverged on task " + task_tag + ": " + e.what());
  }

  // Phase 4: snapshot biases and advance the registry.
  freeze_current(reg, layers);
  for (size_t li = 0; li < layers.size(); ++li) {
    const int64_t free = layers[li]->count_free();
    log.free_after_per_layer[names[li]] = free;
    log.free_after_total += free;
  }
  return log;
}

std::vector<EpochLog> ContinualTrainer::train_unmasked(const Partition& task_data,
                                                       const Scenario& scenario, int task,
                                                       int epochs, TrainObjective objective) {
  task_data.validate();
  if (task_data.size() == 0) throw TrainError("task " + std::to_string(task) + " has no training data");
  std::vector<int> head_labels(task_data.labels.size());
  for (size_t i = 0; i < task_data.labels.size(); ++i) {
    head_labels[i] = scenario.head_index(task_data.labels[i]);
  }

  const std::string task_tag = std::to_string(task);
  Rng batch_rng = Rng::derive(plan_.seed, "batch/task" + task_tag);
  Rng noise_rng = Rng::derive(plan_.seed, "noise/task" + task_tag);

  const std::vector<MaskedLinearLayer*> layers = model_.layers();
  std::vector<AdamState> w_states(layers.size());
  std::vector<AdamState> b_states(layers.size());
  std::vector<EpochLog> logs;
  try {
    for (int e = 0; e < epochs; ++e) {
      logs.push_back(run_epoch(task_data, head_labels, task, Phase::Full, batch_rng, noise_rng,
                               w_states, b_states, objective));
    }
  } catch (const NumericError& e) {
    throw NumericError("training diverged on task " + task_tag + ": " + e.what());
  }
  return logs;
}

std::pair<std::vector<TaskLog>, AccuracyMatrix> ContinualTrainer::run_scenario(
    const Scenario& scenario, const std::function<void(int, const TaskLog&)>& on_freeze) {
  scenario.validate();
  const int n_tasks = scenario.task_count();
  if (n_tasks > model_.registry().total_tasks_planned) {
    throw TrainError("scenario spans " + std::to_string(n_tasks) + " tasks, model planned for " +
                     std::to_string(model_.registry().total_tasks_planned));
  }
  if (model_.config().class_count < scenario.total_classes()) {
    throw TrainError("model head has " + std::to_string(model_.config().class_count) +
                     " classes, scenario needs " + std::to_string(scenario.total_classes()));
  }
  if (model_.registry().current_task != 0 || model_.registry().trained_since_freeze) {
    throw TrainError("run_scenario requires a freshly constructed model");
  }

  std::vector<TaskLog> logs;
  AccuracyMatrix matrix;
  for (int t = 0; t < n_tasks; ++t) {
    logs.push_back(train_task(scenario.train_split(t), scenario, t));
    if (on_freeze) on_freeze(t, logs.back());

    // Accuracy-over-time: evaluate every task seen so far, then the union.
    const Scenario seen = scenario.prefix(t);
    std::vector<double> row;
    for (int u = 0; u <= t; ++u) {
      row.push_back(evaluate(model_, seen, scenario.test_split(u)).class_il_accuracy);
    }
    const EvalResult joint = evaluate(model_, seen, scenario.test_union(t));
    matrix.class_il.push_back(std::move(row));
    matrix.task_id.push_back(joint.task_id_accuracy);
    matrix.overall.push_back(joint.class_il_accuracy);
  }
  matrix.validate();
  return {std::move(logs), matrix};
}

}  // namespace surprisenet
