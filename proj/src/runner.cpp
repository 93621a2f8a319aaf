#include "surprisenet/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "surprisenet/baselines.hpp"
#include "surprisenet/checkpoint.hpp"
#include "surprisenet/report.hpp"
#include "surprisenet/rng.hpp"

namespace surprisenet {

namespace fs = std::filesystem;

void RunConfig::merge_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "kind") kind = value.get<std::string>();
      else if (key == "dataset_name") dataset_name = value.get<std::string>();
      else if (key == "train_images") train_images = value.get<std::string>();
      else if (key == "train_labels") train_labels = value.get<std::string>();
      else if (key == "test_images") test_images = value.get<std::string>();
      else if (key == "test_labels") test_labels = value.get<std::string>();
      else if (key == "train_csv") train_csv = value.get<std::string>();
      else if (key == "test_csv") test_csv = value.get<std::string>();
      else if (key == "label_col") label_col = value.get<std::string>();
      else if (key == "synth_classes") synth_classes = value.get<int>();
      else if (key == "synth_dim") synth_dim = value.get<int64_t>();
      else if (key == "synth_per_class") synth_per_class = value.get<int64_t>();
      else if (key == "synth_sep") synth_sep = value.get<double>();
      else if (key == "n_tasks") n_tasks = value.get<int>();
      else if (key == "classes_per_task") classes_per_task = value.get<int>();
      else if (key == "seed") seed = value.get<uint64_t>();
      else if (key == "hidden_dims") hidden_dims = value.get<std::vector<int64_t>>();
      else if (key == "latent_dim") latent_dim = value.get<int64_t>();
      else if (key == "variant") variant = value.get<std::string>();
      else if (key == "kl_weight") kl_weight = value.get<float>();
      else if (key == "epochs") epochs = value.get<int>();
      else if (key == "retrain_epochs") retrain_epochs = value.get<int>();
      else if (key == "prune") prune = value.get<std::string>();
      else if (key == "learning_rate") learning_rate = value.get<float>();
      else if (key == "batch_size") batch_size = value.get<int>();
      else if (key == "run_dir") run_dir = value.get<std::string>();
      else throw ConfigError("unknown config key '" + key + "'");
    } catch (const json::exception& e) {
      throw ConfigError("config key '" + key + "': " + e.what());
    }
  }
}

json RunConfig::to_json() const {
  return json{{"kind", kind},
              {"dataset_name", dataset_name},
              {"train_images", train_images},
              {"train_labels", train_labels},
              {"test_images", test_images},
              {"test_labels", test_labels},
              {"train_csv", train_csv},
              {"test_csv", test_csv},
              {"label_col", label_col},
              {"synth_classes", synth_classes},
              {"synth_dim", synth_dim},
              {"synth_per_class", synth_per_class},
              {"synth_sep", synth_sep},
              {"n_tasks", n_tasks},
              {"classes_per_task", classes_per_task},
              {"seed", seed},
              {"hidden_dims", hidden_dims},
              {"latent_dim", latent_dim},
              {"variant", variant},
              {"kl_weight", kl_weight},
              {"epochs", epochs},
              {"retrain_epochs", retrain_epochs},
              {"prune", prune},
              {"learning_rate", learning_rate},
              {"batch_size", batch_size},
              {"run_dir", run_dir}};
}

void RunConfig::apply_defaults() {
  if (dataset_name.empty()) dataset_name = kind;
  if (kind == "idx") {
    // Image data: the smaller rate; 20 epochs with the half-budget retrain.
    if (learning_rate == 0.f) learning_rate = 1e-4f;
    if (epochs == 0) epochs = 20;
    if (hidden_dims.empty()) hidden_dims = {256, 128};
    if (latent_dim == 0) latent_dim = 64;
  } else if (kind == "csv") {
    // Structured/tabular data: higher rate; a 200-epoch budget split 134+66.
    if (learning_rate == 0.f) learning_rate = 8e-4f;
    if (epochs == 0) {
      epochs = 134;
      if (retrain_epochs < 0) retrain_epochs = 66;
    }
    if (hidden_dims.empty()) hidden_dims = {128, 64};
    if (latent_dim == 0) latent_dim = 32;
  } else {
    // Synthetic clusters: small, fast, and forgiving of an aggressive rate.
    if (learning_rate == 0.f) learning_rate = 5e-3f;
    if (epochs == 0) epochs = 40;
    if (hidden_dims.empty()) hidden_dims = {64, 32};
    if (latent_dim == 0) latent_dim = 8;
  }
}

void RunConfig::validate() const {
  if (kind != "synth" && kind != "idx" && kind != "csv") {
    throw ConfigError("unknown dataset kind '" + kind + "' (want synth, idx or csv)");
  }
  if (kind == "idx") {
    if (train_images.empty() || train_labels.empty() || test_images.empty() || test_labels.empty()) {
      throw ConfigError("idx data needs --train-images, --train-labels, --test-images, --test-labels");
    }
  }
  if (kind == "csv") {
    if (train_csv.empty() || test_csv.empty()) {
      throw ConfigError("csv data needs --train-csv and --test-csv");
    }
  }
  if (kind == "synth") {
    if (synth_classes < 1 || synth_dim < 1 || synth_per_class < 2 || synth_sep < 0) {
      throw ConfigError("bad synthetic data parameters");
    }
  }
  if (n_tasks < 1) throw ConfigError("n_tasks must be >= 1");
  if (n_tasks > kMaxTasks) throw ConfigError("n_tasks must be <= " + std::to_string(kMaxTasks));
  if (classes_per_task < 1) throw ConfigError("classes_per_task must be >= 1");
  if (latent_dim < 1) throw ConfigError("latent_dim must be >= 1");
  for (int64_t h : hidden_dims) {
    if (h < 1) throw ConfigError("hidden dims must be positive");
  }
  variant_from_name(variant);   // throws on unknown
  PruneSchedule::parse(prune);  // throws on bad grammar
  train_plan().validate();
  if (run_dir.empty()) throw ConfigError("run_dir must not be empty");
}

ModelConfig RunConfig::model_config(int64_t input_dim, int64_t class_count) const {
  ModelConfig mc;
  mc.input_dim = input_dim;
  mc.hidden_dims = hidden_dims;
  mc.latent_dim = latent_dim;
  mc.class_count = class_count;
  mc.variant = variant_from_name(variant);
  mc.kl_weight = kl_weight;
  return mc;
}

TrainPlan RunConfig::train_plan() const {
  TrainPlan plan;
  plan.epochs_per_task = epochs;
  plan.retrain_epochs = retrain_epochs;
  plan.schedule = PruneSchedule::parse(prune);
  plan.learning_rate = learning_rate;
  plan.batch_size = batch_size;
  plan.seed = seed;
  return plan;
}

void prepare_run(const RunConfig& cfg, PreparedRun& out) {
  if (cfg.kind == "synth") {
    out.dataset =
        synth_clusters(cfg.synth_classes, cfg.synth_dim, cfg.synth_per_class, cfg.synth_sep, cfg.seed);
  } else if (cfg.kind == "idx") {
    out.dataset = make_dataset(load_idx(cfg.train_images, cfg.train_labels),
                               load_idx(cfg.test_images, cfg.test_labels), cfg.dataset_name);
  } else {
    out.dataset = make_dataset(load_csv(cfg.train_csv, cfg.label_col),
                               load_csv(cfg.test_csv, cfg.label_col), cfg.dataset_name);
  }
  out.dataset.name = cfg.dataset_name;
  out.scenario = make_scenario(out.dataset, cfg.n_tasks, cfg.classes_per_task, cfg.seed);
  if (cfg.kind == "csv") {
    // Tabular features are z-scored against the first task's training rows,
    // then the statistics stay frozen for the whole run.
    standardize_from_first_task(out.dataset, out.scenario);
  }
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// The full pipeline behind cmd_run; quiet when verbose is false (sweep
// workers). Throws on failure.
RunReport run_pipeline(const RunConfig& cfg, bool verbose) {
  const auto t0 = std::chrono::steady_clock::now();
  PreparedRun prep;
  prepare_run(cfg, prep);

  const ModelConfig mc = cfg.model_config(prep.dataset.feature_dim, prep.scenario.total_classes());
  const TrainPlan plan = cfg.train_plan();
  HybridModel model(mc, prep.scenario.task_count());
  ContinualTrainer trainer(model, plan);

  std::error_code ec;
  fs::create_directories(cfg.run_dir, ec);
  if (ec) throw ReportError("cannot create run dir " + cfg.run_dir + ": " + ec.message());
  const fs::path dir(cfg.run_dir);

  json echo;
  echo["run"] = cfg.to_json();
  echo["model"] = model_config_to_json(mc);
  echo["plan"] = plan_to_json(plan);
  echo["scenario"] = scenario_to_json(prep.scenario);
  echo["prng"] = kPrngName;

  std::ofstream(dir / "task_logs.jsonl", std::ios::trunc);  // reset the log stream
  const auto on_freeze = [&](int task, const TaskLog& log) {
    save_checkpoint(model, (dir / "checkpoint.bin").string(), echo);
    std::ofstream lines(dir / "task_logs.jsonl", std::ios::app);
    lines << task_log_to_json(log).dump() << "\n";
    if (verbose) {
      std::cout << "task " << task << ": lambda=" << log.lambda
                << " free_after=" << log.free_after_total << "\n";
    }
  };

  auto [logs, matrix] = trainer.run_scenario(prep.scenario, on_freeze);

  RunReport report;
  report.config = echo;
  report.dataset = cfg.dataset_name;
  report.variant = cfg.variant;
  report.schedule = plan.schedule.to_string();
  report.seed = cfg.seed;
  report.final_accuracy = matrix.overall.back();
  report.final_task_id_accuracy = matrix.task_id.back();
  report.matrix = std::move(matrix);
  report.task_logs = std::move(logs);
  report.timing_extra = json{{"total_seconds", seconds_since(t0)}};
  write_report(report, cfg.run_dir);

  if (verbose) {
    for (int t = 0; t < report.matrix.task_count(); ++t) {
      std::cout << "after task " << t << ": overall=" << report.matrix.overall[static_cast<size_t>(t)]
                << " task_id=" << report.matrix.task_id[static_cast<size_t>(t)] << "\n";
    }
  }
  return report;
}

// Runs `body` with the config already resolved; maps exceptions to the
// documented exit codes (2 = config, 3 = runtime).
template <class Body>
int with_exit_codes(RunConfig& cfg, Body body) {
  try {
    cfg.apply_defaults();
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    return body();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int env_thread_cap() {
  const char* raw = std::getenv("SURPRISENET_THREADS");
  if (raw == nullptr) return 1;
  const long v = std::strtol(raw, nullptr, 10);
  return v >= 1 ? static_cast<int>(v) : 1;
}

}  // namespace

int cmd_run(RunConfig cfg) {
  return with_exit_codes(cfg, [&]() {
    std::cout << "run: dataset=" << cfg.dataset_name << " tasks=" << cfg.n_tasks
              << " classes_per_task=" << cfg.classes_per_task << " variant=" << cfg.variant
              << " schedule=" << cfg.prune << " seed=" << cfg.seed << "\n";
    const RunReport report = run_pipeline(cfg, true);
    std::cout << "final accuracy " << report.final_accuracy << ", task-ID accuracy "
              << report.final_task_id_accuracy << " -> " << cfg.run_dir << "\n";
    return kExitOk;
  });
}

int cmd_baseline(RunConfig cfg, const std::string& kind) {
  if (kind != "naive" && kind != "joint") {
    std::cerr << "config error: unknown baseline kind '" << kind << "' (want naive or joint)\n";
    return kExitConfig;
  }
  return with_exit_codes(cfg, [&]() {
    PreparedRun prep;
    prepare_run(cfg, prep);
    const TrainPlan plan = cfg.train_plan();

    RunReport report;
    if (kind == "naive") {
      const ModelConfig mc =
          cfg.model_config(prep.dataset.feature_dim, prep.scenario.total_classes());
      report = naive_baseline(prep.scenario, mc, plan);
    } else {
      // Joint trains every dataset class at once; the head spans all of them.
      const ModelConfig mc = cfg.model_config(prep.dataset.feature_dim, prep.dataset.class_count);
      report = joint_baseline(prep.dataset, mc, plan);
    }
    report.dataset = cfg.dataset_name;
    report.config["run"] = cfg.to_json();
    write_report(report, cfg.run_dir);
    std::cout << kind << " baseline: final accuracy " << report.final_accuracy << " -> "
              << cfg.run_dir << "\n";
    return kExitOk;
  });
}

int cmd_sweep(RunConfig cfg, std::vector<uint64_t> seeds) {
  if (seeds.empty()) {
    std::cerr << "config error: sweep needs at least one seed\n";
    return kExitConfig;
  }
  return with_exit_codes(cfg, [&]() {
    std::error_code ec;
    fs::create_directories(cfg.run_dir, ec);
    if (ec) throw ReportError("cannot create run dir " + cfg.run_dir + ": " + ec.message());

    std::vector<std::optional<RunReport>> reports(seeds.size());
    std::vector<std::string> failures(seeds.size());

    const int threads = std::min<int>(env_thread_cap(), static_cast<int>(seeds.size()));
    std::atomic<size_t> next{0};
    const auto worker = [&]() {
      for (size_t i; (i = next.fetch_add(1)) < seeds.size();) {
        RunConfig child = cfg;
        child.seed = seeds[i];
        child.run_dir = cfg.run_dir + "/seed_" + std::to_string(seeds[i]);
        try {
          reports[i] = run_pipeline(child, false);
        } catch (const std::exception& e) {
          failures[i] = e.what();
        }
      }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    // Combined summary (seed order, successful runs only) + aggregate stats.
    std::ofstream summary(fs::path(cfg.run_dir) / "summary.csv", std::ios::trunc);
    summary << summary_header() << "\n";
    std::vector<double> finals;
    for (size_t i = 0; i < seeds.size(); ++i) {
      if (reports[i]) {
        summary << summary_line(*reports[i]) << "\n";
        finals.push_back(reports[i]->final_accuracy);
        std::cout << "seed " << seeds[i] << ": final accuracy " << reports[i]->final_accuracy << "\n";
      } else {
        std::cout << "seed " << seeds[i] << ": FAILED (" << failures[i] << ")\n";
      }
    }
    summary.close();
    if (!summary) throw ReportError("cannot write sweep summary.csv");

    double mean = 0.0;
    for (double f : finals) mean += f;
    if (!finals.empty()) mean /= static_cast<double>(finals.size());
    double stddev = 0.0;  // sample standard deviation; a single run reports 0
    if (finals.size() > 1) {
      double sq = 0.0;
      for (double f : finals) sq += (f - mean) * (f - mean);
      stddev = std::sqrt(sq / static_cast<double>(finals.size() - 1));
    }
    json aggregate{{"mean_final_accuracy", mean},
                   {"std_final_accuracy", stddev},
                   {"runs", finals.size()},
                   {"failed", seeds.size() - finals.size()}};
    std::ofstream agg(fs::path(cfg.run_dir) / "aggregate.json", std::ios::trunc);
    agg << aggregate.dump(2) << "\n";
    if (!agg) throw ReportError("cannot write aggregate.json");

    std::cout << "sweep: mean final accuracy " << mean << " +- " << stddev << " over "
              << finals.size() << " run(s)\n";
    if (finals.size() != seeds.size()) return kExitRuntime;
    return kExitOk;
  });
}

json run_from_json(const json& config) {
  RunConfig cfg;
  cfg.merge_json(config);
  cfg.apply_defaults();
  cfg.validate();
  return report_to_json(run_pipeline(cfg, false));
}

int cmd_inspect(const std::string& checkpoint_path) {
  try {
    std::cout << inspect_checkpoint(checkpoint_path).dump(2) << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace surprisenet
