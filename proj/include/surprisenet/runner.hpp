#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "surprisenet/serialize.hpp"

namespace surprisenet {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

// Fully describes one run. Zero/empty fields marked "by kind" are resolved by
// apply_defaults() from the dataset kind; the echoed config in report.json is
// always the resolved form, so a run is reproducible from it.
struct RunConfig {
  std::string kind = "synth";  // synth | idx | csv
  std::string dataset_name;    // defaults to kind

  // idx
  std::string train_images, train_labels, test_images, test_labels;
  // csv
  std::string train_csv, test_csv;
  std::string label_col = "label";
  // synth
  int synth_classes = 10;
  int64_t synth_dim = 16;
  int64_t synth_per_class = 200;
  double synth_sep = 8.0;

  // scenario
  int n_tasks = 5;
  int classes_per_task = 2;
  uint64_t seed = 1;

  // model (hidden_dims empty / latent_dim 0 = by kind)
  std::vector<int64_t> hidden_dims;
  int64_t latent_dim = 0;
  std::string variant = "ae";
  float kl_weight = 0.001f;

  // train plan (epochs 0 / learning_rate 0 = by kind)
  int epochs = 0;
  int retrain_epochs = -1;  // -1 = ceil(epochs / 2)
  std::string prune = "eqprune";
  float learning_rate = 0.f;
  int batch_size = 64;

  std::string run_dir = "runs/out";

  // Applies keys present in j over the current values; unknown keys throw.
  void merge_json(const json& j);
  json to_json() const;

  void apply_defaults();
  void validate() const;

  ModelConfig model_config(int64_t input_dim, int64_t class_count) const;
  TrainPlan train_plan() const;
};

// Load + scenario + (csv-only) standardization, shared by run and baselines.
struct PreparedRun {
  Dataset dataset;
  Scenario scenario;  // references `dataset`

  PreparedRun() = default;
  PreparedRun(const PreparedRun&) = delete;  // scenario holds a pointer into dataset
  PreparedRun& operator=(const PreparedRun&) = delete;
};
void prepare_run(const RunConfig& cfg, PreparedRun& out);

// Full pipeline: train, checkpoint each freeze, evaluate, write the report.
int cmd_run(RunConfig cfg);

// kind: "naive" | "joint"; anything else is a config error.
int cmd_baseline(RunConfig cfg, const std::string& kind);

// One cmd_run per seed (SURPRISENET_THREADS caps concurrency), combined
// summary.csv and aggregate.json under cfg.run_dir; children run in
// cfg.run_dir/seed_<s>. Any child failure yields a nonzero exit but leaves
// completed results in place.
int cmd_sweep(RunConfig cfg, std::vector<uint64_t> seeds);

// Prints checkpoint metadata and per-layer assignment summaries as JSON.
int cmd_inspect(const std::string& checkpoint_path);

// Programmatic equivalent of cmd_run (used by the Python bindings): executes
// the pipeline described by `config` (same keys as the CLI flags / config
// file) and returns the full report as JSON. Throws on failure.
json run_from_json(const json& config);

}  // namespace surprisenet
