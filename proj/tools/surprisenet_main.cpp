// Command-line entry point: run scenarios, run baselines, sweep seeds,
// inspect checkpoints. Flags mirror the JSON config keys one-to-one, so the
// config echoed into report.json can be fed straight back via --config.
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "surprisenet/runner.hpp"

namespace {

using surprisenet::RunConfig;

// Copies one flag's value over the merged config when it was given on the
// command line (flags beat config-file values, which beat defaults).
struct FlagCopier {
  CLI::Option* option;
  std::function<void(RunConfig&, const RunConfig&)> copy;
};

template <class T>
void track(std::vector<FlagCopier>& copiers, CLI::Option* option, T RunConfig::* member) {
  copiers.push_back({option, [member](RunConfig& dst, const RunConfig& src) { dst.*member = src.*member; }});
}

void add_common_flags(CLI::App* cmd, RunConfig& flags, std::vector<FlagCopier>& copiers,
                      std::string& config_path) {
  cmd->add_option("--config", config_path, "JSON config file (flags override its values)");

  track(copiers, cmd->add_option("--dataset", flags.kind, "Dataset kind: synth, idx or csv"),
        &RunConfig::kind);
  track(copiers, cmd->add_option("--name", flags.dataset_name, "Dataset name used in reports"),
        &RunConfig::dataset_name);

  track(copiers, cmd->add_option("--train-images", flags.train_images, "IDX training images"),
        &RunConfig::train_images);
  track(copiers, cmd->add_option("--train-labels", flags.train_labels, "IDX training labels"),
        &RunConfig::train_labels);
  track(copiers, cmd->add_option("--test-images", flags.test_images, "IDX test images"),
        &RunConfig::test_images);
  track(copiers, cmd->add_option("--test-labels", flags.test_labels, "IDX test labels"),
        &RunConfig::test_labels);

  track(copiers, cmd->add_option("--train-csv", flags.train_csv, "CSV training split"),
        &RunConfig::train_csv);
  track(copiers, cmd->add_option("--test-csv", flags.test_csv, "CSV test split"),
        &RunConfig::test_csv);
  track(copiers, cmd->add_option("--label-col", flags.label_col, "CSV label column name"),
        &RunConfig::label_col);

  track(copiers, cmd->add_option("--synth-classes", flags.synth_classes, "Synthetic class count"),
        &RunConfig::synth_classes);
  track(copiers, cmd->add_option("--synth-dim", flags.synth_dim, "Synthetic feature dim"),
        &RunConfig::synth_dim);
  track(copiers,
        cmd->add_option("--synth-per-class", flags.synth_per_class, "Synthetic instances per class"),
        &RunConfig::synth_per_class);
  track(copiers,
        cmd->add_option("--synth-sep", flags.synth_sep, "Synthetic cluster separation (sigmas)"),
        &RunConfig::synth_sep);

  track(copiers, cmd->add_option("--n-tasks", flags.n_tasks, "Number of tasks"), &RunConfig::n_tasks);
  track(copiers, cmd->add_option("--classes-per-task", flags.classes_per_task, "Classes per task"),
        &RunConfig::classes_per_task);
  track(copiers, cmd->add_option("--seed", flags.seed, "Run seed (class order, init, batches)"),
        &RunConfig::seed);

  track(copiers,
        cmd->add_option("--hidden", flags.hidden_dims, "Encoder hidden widths (decoder mirrors)")
            ->delimiter(','),
        &RunConfig::hidden_dims);
  track(copiers, cmd->add_option("--latent", flags.latent_dim, "Latent dim"), &RunConfig::latent_dim);
  track(copiers, cmd->add_option("--variant", flags.variant, "Model variant: ae or vae"),
        &RunConfig::variant);
  track(copiers, cmd->add_option("--kl-weight", flags.kl_weight, "KL weight (vae only)"),
        &RunConfig::kl_weight);

  track(copiers, cmd->add_option("--epochs", flags.epochs, "Training epochs per task"),
        &RunConfig::epochs);
  track(copiers,
        cmd->add_option("--retrain-epochs", flags.retrain_epochs,
                        "Retrain epochs per task (default: half the training epochs)"),
        &RunConfig::retrain_epochs);
  track(copiers,
        cmd->add_option("--prune", flags.prune, "Prune schedule: eqprune or fixed:<lambda>"),
        &RunConfig::prune);
  track(copiers, cmd->add_option("--lr", flags.learning_rate, "Learning rate"),
        &RunConfig::learning_rate);
  track(copiers, cmd->add_option("--batch-size", flags.batch_size, "Batch size"),
        &RunConfig::batch_size);

  track(copiers, cmd->add_option("--out", flags.run_dir, "Run output directory"),
        &RunConfig::run_dir);
}

// Defaults, then config-file values, then explicit flags. Returns false (with
// a diagnostic) when the config file cannot be read.
bool merge_config(const std::string& config_path, const RunConfig& flags,
                  const std::vector<FlagCopier>& copiers, RunConfig& out) {
  out = RunConfig{};
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "config error: cannot open " << config_path << "\n";
      return false;
    }
    const surprisenet::json j = surprisenet::json::parse(in, nullptr, false);
    if (j.is_discarded()) {
      std::cerr << "config error: " << config_path << " is not valid JSON\n";
      return false;
    }
    try {
      out.merge_json(j);
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return false;
    }
  }
  for (const auto& c : copiers) {
    if (c.option->count() > 0) c.copy(out, flags);
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Replay-free class-incremental learner: train/prune/retrain/freeze parameter "
               "isolation with reconstruction-based task inference"};
  app.require_subcommand(1);

  RunConfig flags;
  std::vector<FlagCopier> copiers;
  std::string config_path;

  CLI::App* run = app.add_subcommand("run", "Train a scenario end to end and write a report");
  add_common_flags(run, flags, copiers, config_path);

  CLI::App* baseline = app.add_subcommand("baseline", "Run a reference baseline (naive or joint)");
  std::string baseline_kind;
  baseline->add_option("kind", baseline_kind, "naive or joint")->required();
  add_common_flags(baseline, flags, copiers, config_path);

  CLI::App* sweep = app.add_subcommand("sweep", "Run one seed per --seeds entry and aggregate");
  std::vector<uint64_t> seeds;
  sweep->add_option("--seeds", seeds, "Seeds to run")->required()->delimiter(',');
  add_common_flags(sweep, flags, copiers, config_path);

  CLI::App* inspect = app.add_subcommand("inspect", "Print checkpoint metadata as JSON");
  std::string checkpoint_path;
  inspect->add_option("checkpoint", checkpoint_path, "Checkpoint file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? surprisenet::kExitOk : surprisenet::kExitConfig;
  }

  if (inspect->parsed()) return surprisenet::cmd_inspect(checkpoint_path);

  RunConfig cfg;
  if (!merge_config(config_path, flags, copiers, cfg)) return surprisenet::kExitConfig;

  if (run->parsed()) return surprisenet::cmd_run(cfg);
  if (baseline->parsed()) return surprisenet::cmd_baseline(cfg, baseline_kind);
  if (sweep->parsed()) return surprisenet::cmd_sweep(cfg, seeds);
  return surprisenet::kExitConfig;
}
