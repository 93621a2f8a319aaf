#include "surprisenet/report.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace surprisenet {

namespace {

std::string fmt_double(double v) {
  std::ostringstream out;
  out << std::setprecision(12) << v;
  return out.str();
}

json epoch_to_json(const EpochLog& e) {
  return json{{"total", e.total},
              {"reconstruction", e.reconstruction},
              {"classification", e.classification},
              {"kl", e.kl}};
}

EpochLog epoch_from_json(const json& j) {
  EpochLog e;
  e.total = j.at("total").get<double>();
  e.reconstruction = j.at("reconstruction").get<double>();
  e.classification = j.at("classification").get<double>();
  e.kl = j.at("kl").get<double>();
  return e;
}

}  // namespace

json task_log_to_json(const TaskLog& t) {
  json epochs = json::array();
  for (const auto& e : t.train_epochs) epochs.push_back(epoch_to_json(e));
  json retrain = json::array();
  for (const auto& e : t.retrain_epochs) retrain.push_back(epoch_to_json(e));
  return json{{"task", t.task},
              {"lambda", t.lambda},
              {"train_epochs", epochs},
              {"retrain_epochs", retrain},
              {"pruned_per_layer", t.pruned_per_layer},
              {"free_after_per_layer", t.free_after_per_layer},
              {"free_after_total", t.free_after_total}};
}

TaskLog task_log_from_json(const json& j) {
  TaskLog t;
  t.task = j.at("task").get<int>();
  t.lambda = j.at("lambda").get<double>();
  for (const auto& e : j.at("train_epochs")) t.train_epochs.push_back(epoch_from_json(e));
  for (const auto& e : j.at("retrain_epochs")) t.retrain_epochs.push_back(epoch_from_json(e));
  t.pruned_per_layer = j.at("pruned_per_layer").get<std::map<std::string, int64_t>>();
  t.free_after_per_layer = j.at("free_after_per_layer").get<std::map<std::string, int64_t>>();
  t.free_after_total = j.at("free_after_total").get<int64_t>();
  return t;
}

void RunReport::validate() const {
  matrix.validate();
  if (matrix.overall.empty()) throw ReportError("report has no evaluation rows");
  if (final_accuracy != matrix.overall.back()) {
    throw ReportError("final accuracy does not equal the last overall accuracy");
  }
  if (final_task_id_accuracy != matrix.task_id.back()) {
    throw ReportError("final task-ID accuracy does not equal the last task-ID entry");
  }
  if (task_logs.size() != matrix.class_il.size()) {
    throw ReportError("task log count does not match accuracy matrix rows");
  }
}

json report_to_json(const RunReport& report) {
  json j;
  j["report_version"] = 1;
  j["config"] = report.config;
  j["dataset"] = report.dataset;
  j["variant"] = report.variant;
  j["schedule"] = report.schedule;
  j["seed"] = report.seed;
  j["averaging"] = report.averaging;
  j["accuracy"] = json{{"class_il", report.matrix.class_il},
                       {"task_id", report.matrix.task_id},
                       {"overall", report.matrix.overall}};
  j["final_accuracy"] = report.final_accuracy;
  j["final_task_id_accuracy"] = report.final_task_id_accuracy;
  json logs = json::array();
  for (const auto& t : report.task_logs) logs.push_back(task_log_to_json(t));
  j["task_logs"] = logs;

  // Wall-clock is quarantined under this one subtree.
  json timing = report.timing_extra.is_object() ? report.timing_extra : json::object();
  json task_times = json::array();
  for (const auto& t : report.task_logs) {
    task_times.push_back(json{{"train_seconds", t.train_seconds},
                              {"prune_seconds", t.prune_seconds},
                              {"retrain_seconds", t.retrain_seconds}});
  }
  timing["tasks"] = task_times;
  j["timing"] = timing;
  return j;
}

RunReport report_from_json(const json& j) {
  RunReport r;
  if (j.at("report_version").get<int>() != 1) {
    throw ReportError("unsupported report version");
  }
  r.config = j.at("config");
  r.dataset = j.at("dataset").get<std::string>();
  r.variant = j.at("variant").get<std::string>();
  r.schedule = j.at("schedule").get<std::string>();
  r.seed = j.at("seed").get<uint64_t>();
  r.averaging = j.at("averaging").get<std::string>();
  const json& acc = j.at("accuracy");
  r.matrix.class_il = acc.at("class_il").get<std::vector<std::vector<double>>>();
  r.matrix.task_id = acc.at("task_id").get<std::vector<double>>();
  r.matrix.overall = acc.at("overall").get<std::vector<double>>();
  r.final_accuracy = j.at("final_accuracy").get<double>();
  r.final_task_id_accuracy = j.at("final_task_id_accuracy").get<double>();
  for (const auto& t : j.at("task_logs")) r.task_logs.push_back(task_log_from_json(t));

  json timing = j.at("timing");
  const json task_times = timing.at("tasks");
  if (task_times.size() != r.task_logs.size()) {
    throw ReportError("timing entries do not match task logs");
  }
  for (size_t i = 0; i < r.task_logs.size(); ++i) {
    r.task_logs[i].train_seconds = task_times[i].at("train_seconds").get<double>();
    r.task_logs[i].prune_seconds = task_times[i].at("prune_seconds").get<double>();
    r.task_logs[i].retrain_seconds = task_times[i].at("retrain_seconds").get<double>();
  }
  timing.erase("tasks");
  r.timing_extra = timing;
  r.validate();
  return r;
}

std::string summary_header() {
  return "dataset,variant,schedule,seed,final_accuracy,task_id_accuracy";
}

std::string summary_line(const RunReport& report) {
  std::ostringstream out;
  out << report.dataset << ',' << report.variant << ',' << report.schedule << ',' << report.seed
      << ',' << fmt_double(report.final_accuracy) << ','
      << fmt_double(report.final_task_id_accuracy);
  return out.str();
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw ReportError("cannot write " + path.string());
}

}  // namespace

void write_report(const RunReport& report, const std::string& run_dir) {
  report.validate();
  std::error_code ec;
  std::filesystem::create_directories(run_dir, ec);
  if (ec) throw ReportError("cannot create run dir " + run_dir + ": " + ec.message());
  const std::filesystem::path dir(run_dir);

  write_file(dir / "report.json", report_to_json(report).dump(2) + "\n");

  // One row per training step, one column per task; cells above the diagonal
  // stay empty (that task had not been trained yet).
  const int n_tasks = report.matrix.task_count();
  std::ostringstream matrix_csv;
  matrix_csv << "after_task";
  for (int u = 0; u < n_tasks; ++u) matrix_csv << ",task_" << u;
  matrix_csv << ",overall,task_id\n";
  for (int t = 0; t < n_tasks; ++t) {
    matrix_csv << t;
    for (int u = 0; u < n_tasks; ++u) {
      matrix_csv << ',';
      if (u <= t) matrix_csv << fmt_double(report.matrix.class_il[static_cast<size_t>(t)][static_cast<size_t>(u)]);
    }
    matrix_csv << ',' << fmt_double(report.matrix.overall[static_cast<size_t>(t)]) << ','
               << fmt_double(report.matrix.task_id[static_cast<size_t>(t)]) << '\n';
  }
  write_file(dir / "accuracy_matrix.csv", matrix_csv.str());

  write_file(dir / "summary.csv", summary_header() + "\n" + summary_line(report) + "\n");
}

}  // namespace surprisenet
