#pragma once

#include <string>
#include <vector>

#include "surprisenet/metrics.hpp"
#include "surprisenet/serialize.hpp"
#include "surprisenet/trainer.hpp"

namespace surprisenet {

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Everything one run produces. Every wall-clock measurement is serialized
// under a single "timing" subtree so determinism checks can strip it.
struct RunReport {
  json config;  // full echo: dataset, scenario, model, plan — a run is reproducible from it

  // Convenience copies for summary rows.
  std::string dataset;
  std::string variant;
  std::string schedule;
  uint64_t seed = 0;

  AccuracyMatrix matrix;
  double final_accuracy = 0.0;          // == matrix.overall.back()
  double final_task_id_accuracy = 0.0;  // == matrix.task_id.back()
  std::vector<TaskLog> task_logs;

  json timing_extra;  // run-level wall-clock (per-phase times live in task_logs)
  std::string averaging = "micro (per-instance)";

  void validate() const;
};

json report_to_json(const RunReport& report);
RunReport report_from_json(const json& j);

// One task's log as JSON (timing excluded — it lives in the report's timing
// subtree). Also the line format of task_logs.jsonl.
json task_log_to_json(const TaskLog& log);
TaskLog task_log_from_json(const json& j);

// One CSV row per run: dataset, variant, schedule, seed, final accuracy,
// task-ID accuracy. `summary_header()` is the matching header line.
std::string summary_header();
std::string summary_line(const RunReport& report);

// Writes report.json, accuracy_matrix.csv and summary.csv into run_dir
// (created if missing).
void write_report(const RunReport& report, const std::string& run_dir);

}  // namespace surprisenet
