#include "surprisenet/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "surprisenet/rng.hpp"

namespace surprisenet {

void Partition::validate() const {
  if (features.rank() != 2) {
    throw DataError("partition features must be rank-2, got shape " + shape_str(features.shape()));
  }
  if (features.rows() != size()) {
    throw DataError("partition has " + std::to_string(features.rows()) + " feature rows but " +
                    std::to_string(size()) + " labels");
  }
}

Dataset make_dataset(Partition train, Partition test, std::string name) {
  train.validate();
  test.validate();
  if (train.dim() != test.dim()) {
    throw DataError(name + ": train feature dim " + std::to_string(train.dim()) +
                    " != test feature dim " + std::to_string(test.dim()));
  }
  int max_label = -1;
  for (const auto* part : {&train, &test}) {
    for (int label : part->labels) {
      if (label < 0) throw DataError(name + ": negative class label " + std::to_string(label));
      max_label = std::max(max_label, label);
    }
  }
  Dataset ds;
  ds.feature_dim = train.dim();
  ds.class_count = max_label + 1;
  ds.name = std::move(name);
  ds.train = std::move(train);
  ds.test = std::move(test);
  return ds;
}

namespace {

uint32_t read_be32(std::ifstream& in, const std::string& path) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw DataError(path + ": truncated IDX header");
  return (static_cast<uint32_t>(b[0]) << 24) | (static_cast<uint32_t>(b[1]) << 16) |
         (static_cast<uint32_t>(b[2]) << 8) | static_cast<uint32_t>(b[3]);
}

std::vector<unsigned char> read_bytes(std::ifstream& in, uint64_t n, const std::string& path) {
  std::vector<unsigned char> buf(n);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
  if (static_cast<uint64_t>(in.gcount()) != n) {
    throw DataError(path + ": truncated IDX payload (wanted " + std::to_string(n) + " bytes, got " +
                    std::to_string(in.gcount()) + ")");
  }
  return buf;
}

}  // namespace

Partition load_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream images(images_path, std::ios::binary);
  if (!images) throw DataError(images_path + ": cannot open");
  const uint32_t image_magic = read_be32(images, images_path);
  if (image_magic != 0x00000803u) {
    throw DataError(images_path + ": bad IDX image magic " + std::to_string(image_magic));
  }
  const uint64_t image_count = read_be32(images, images_path);
  const uint64_t rows = read_be32(images, images_path);
  const uint64_t cols = read_be32(images, images_path);
  if (image_count == 0 || rows == 0 || cols == 0) {
    throw DataError(images_path + ": empty IDX image file");
  }

  std::ifstream labels(labels_path, std::ios::binary);
  if (!labels) throw DataError(labels_path + ": cannot open");
  const uint32_t label_magic = read_be32(labels, labels_path);
  if (label_magic != 0x00000801u) {
    throw DataError(labels_path + ": bad IDX label magic " + std::to_string(label_magic));
  }
  const uint64_t label_count = read_be32(labels, labels_path);
  if (label_count != image_count) {
    throw DataError(labels_path + ": " + std::to_string(label_count) + " labels for " +
                    std::to_string(image_count) + " images");
  }

  const auto pixels = read_bytes(images, image_count * rows * cols, images_path);
  const auto label_bytes = read_bytes(labels, label_count, labels_path);

  Partition part;
  part.features = Tensor({static_cast<int64_t>(image_count), static_cast<int64_t>(rows * cols)});
  for (size_t i = 0; i < pixels.size(); ++i) {
    part.features[static_cast<int64_t>(i)] = static_cast<float>(pixels[i]) / 255.0f;
  }
  part.labels.reserve(label_bytes.size());
  for (unsigned char b : label_bytes) part.labels.push_back(static_cast<int>(b));
  return part;
}

namespace {

std::string trim(const std::string& s) {
  size_t begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  size_t end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

float parse_feature(const std::string& cell, size_t row, const std::string& column) {
  float value = 0.f;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || cell.empty()) {
    throw DataError("row " + std::to_string(row) + ", column '" + column + "': '" + cell +
                    "' is not numeric");
  }
  return value;
}

int parse_label(const std::string& cell, size_t row) {
  long value = 0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || cell.empty()) {
    throw DataError("row " + std::to_string(row) + ": label '" + cell +
                    "' is not an integer class id");
  }
  return static_cast<int>(value);
}

}  // namespace

Partition load_csv(const std::string& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open");

  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file (no header row)");
  const std::vector<std::string> header = split_csv_line(line);

  size_t label_index = header.size();
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == label_column) {
      label_index = i;
      break;
    }
  }
  if (label_index == header.size()) {
    throw DataError(path + ": label column '" + label_column + "' not found in header");
  }
  if (header.size() < 2) throw DataError(path + ": no feature columns");

  std::vector<float> flat;
  std::vector<int> labels;
  size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DataError(path + ": row " + std::to_string(row) + " has " +
                      std::to_string(cells.size()) + " columns, header has " +
                      std::to_string(header.size()));
    }
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i == label_index) {
        labels.push_back(parse_label(cells[i], row));
      } else {
        flat.push_back(parse_feature(cells[i], row, header[i]));
      }
    }
  }
  if (labels.empty()) throw DataError(path + ": no data rows");

  Partition part;
  part.features = Tensor({static_cast<int64_t>(labels.size()),
                          static_cast<int64_t>(header.size() - 1)},
                         std::move(flat));
  part.labels = std::move(labels);
  return part;
}

Standardizer Standardizer::fit(const Tensor& features) {
  const int64_t n = features.rows();
  const int64_t d = features.cols();
  if (n == 0) throw DataError("cannot fit standardizer on zero rows");
  Standardizer s;
  s.mean.resize(static_cast<size_t>(d));
  s.inv_std.resize(static_cast<size_t>(d));
  for (int64_t c = 0; c < d; ++c) {
    double sum = 0.0;
    for (int64_t r = 0; r < n; ++r) sum += features(r, c);
    const double mean = sum / static_cast<double>(n);
    double sq = 0.0;
    for (int64_t r = 0; r < n; ++r) {
      const double diff = features(r, c) - mean;
      sq += diff * diff;
    }
    const double stddev = std::sqrt(sq / static_cast<double>(n));
    s.mean[static_cast<size_t>(c)] = static_cast<float>(mean);
    s.inv_std[static_cast<size_t>(c)] = stddev < 1e-8 ? 1.0f : static_cast<float>(1.0 / stddev);
  }
  return s;
}

Tensor Standardizer::apply(const Tensor& features) const {
  if (features.cols() != static_cast<int64_t>(mean.size())) {
    throw DataError("standardizer fit on " + std::to_string(mean.size()) +
                    " features, applied to " + std::to_string(features.cols()));
  }
  Tensor out(features.shape());
  for (int64_t r = 0; r < features.rows(); ++r) {
    for (int64_t c = 0; c < features.cols(); ++c) {
      const size_t ci = static_cast<size_t>(c);
      out(r, c) = (features(r, c) - mean[ci]) * inv_std[ci];
    }
  }
  return out;
}

int Scenario::total_classes() const {
  int total = 0;
  for (const auto& set : task_classes) total += static_cast<int>(set.size());
  return total;
}

int Scenario::head_index(int label) const {
  int index = 0;
  for (const auto& set : task_classes) {
    for (int cls : set) {
      if (cls == label) return index;
      ++index;
    }
  }
  throw DataError("label " + std::to_string(label) + " is not part of this scenario");
}

int Scenario::label_at_head(int head) const {
  int index = 0;
  for (const auto& set : task_classes) {
    for (int cls : set) {
      if (index == head) return cls;
      ++index;
    }
  }
  throw DataError("head index " + std::to_string(head) + " out of range");
}

int Scenario::task_of_label(int label) const {
  for (size_t t = 0; t < task_classes.size(); ++t) {
    for (int cls : task_classes[t]) {
      if (cls == label) return static_cast<int>(t);
    }
  }
  throw DataError("label " + std::to_string(label) + " is not part of this scenario");
}

const std::vector<int>& Scenario::classes_of(int task) const {
  if (task < 0 || task >= task_count()) {
    throw DataError("task " + std::to_string(task) + " out of range [0, " +
                    std::to_string(task_count()) + ")");
  }
  return task_classes[static_cast<size_t>(task)];
}

namespace {

// Rows of `part` whose labels fall in the member set, original order kept.
Partition filter_rows(const Partition& part, const std::vector<char>& member) {
  std::vector<int64_t> keep;
  for (int64_t r = 0; r < part.size(); ++r) {
    const int label = part.labels[static_cast<size_t>(r)];
    if (label >= 0 && static_cast<size_t>(label) < member.size() &&
        member[static_cast<size_t>(label)]) {
      keep.push_back(r);
    }
  }
  const int64_t d = part.dim();
  Partition out;
  out.features = Tensor({static_cast<int64_t>(keep.size()), d});
  out.labels.reserve(keep.size());
  for (size_t i = 0; i < keep.size(); ++i) {
    std::memcpy(out.features.data() + static_cast<int64_t>(i) * d,
                part.features.data() + keep[i] * d, static_cast<size_t>(d) * sizeof(float));
    out.labels.push_back(part.labels[static_cast<size_t>(keep[i])]);
  }
  return out;
}

std::vector<char> membership(const Dataset& ds, const std::vector<int>& classes) {
  std::vector<char> member(static_cast<size_t>(ds.class_count), 0);
  for (int cls : classes) {
    if (cls < 0 || cls >= ds.class_count) {
      throw DataError("scenario class " + std::to_string(cls) + " outside dataset range");
    }
    member[static_cast<size_t>(cls)] = 1;
  }
  return member;
}

}  // namespace

Partition Scenario::train_split(int task) const {
  if (dataset == nullptr) throw DataError("scenario has no dataset");
  return filter_rows(dataset->train, membership(*dataset, classes_of(task)));
}

Partition Scenario::test_split(int task) const {
  if (dataset == nullptr) throw DataError("scenario has no dataset");
  return filter_rows(dataset->test, membership(*dataset, classes_of(task)));
}

Partition Scenario::test_union(int through_task) const {
  if (dataset == nullptr) throw DataError("scenario has no dataset");
  classes_of(through_task);  // bounds check
  std::vector<int> classes;
  for (int t = 0; t <= through_task; ++t) {
    const auto& set = classes_of(t);
    classes.insert(classes.end(), set.begin(), set.end());
  }
  return filter_rows(dataset->test, membership(*dataset, classes));
}

Scenario Scenario::prefix(int through_task) const {
  classes_of(through_task);  // bounds check
  Scenario out;
  out.dataset = dataset;
  out.class_order_seed = class_order_seed;
  out.task_classes.assign(task_classes.begin(), task_classes.begin() + through_task + 1);
  return out;
}

void Scenario::validate() const {
  if (dataset == nullptr) throw DataError("scenario has no dataset");
  if (task_classes.empty()) throw DataError("scenario has no tasks");
  std::vector<char> seen(static_cast<size_t>(dataset->class_count), 0);
  for (const auto& set : task_classes) {
    if (set.empty()) throw DataError("scenario contains an empty task");
    for (int cls : set) {
      if (cls < 0 || cls >= dataset->class_count) {
        throw DataError("scenario class " + std::to_string(cls) + " outside dataset range");
      }
      if (seen[static_cast<size_t>(cls)]) {
        throw DataError("class " + std::to_string(cls) + " appears in more than one task");
      }
      seen[static_cast<size_t>(cls)] = 1;
    }
  }
  for (int t = 0; t < task_count(); ++t) {
    if (train_split(t).size() == 0) {
      throw DataError("task " + std::to_string(t) + " has no training instances");
    }
    if (test_split(t).size() == 0) {
      throw DataError("task " + std::to_string(t) + " has no test instances");
    }
  }
}

Scenario make_scenario(const Dataset& dataset, int n_tasks, int classes_per_task, uint64_t seed) {
  if (n_tasks < 1) throw DataError("scenario needs at least one task");
  if (classes_per_task < 1) throw DataError("tasks need at least one class each");
  const int needed = n_tasks * classes_per_task;
  if (needed > dataset.class_count) {
    throw DataError("scenario needs " + std::to_string(needed) + " classes, dataset '" +
                    dataset.name + "' has " + std::to_string(dataset.class_count));
  }

  std::vector<int> order(static_cast<size_t>(dataset.class_count));
  std::iota(order.begin(), order.end(), 0);
  Rng rng = Rng::derive(seed, "class-order");
  rng.shuffle(order);

  Scenario sc;
  sc.dataset = &dataset;
  sc.class_order_seed = seed;
  sc.task_classes.resize(static_cast<size_t>(n_tasks));
  for (int t = 0; t < n_tasks; ++t) {
    auto& set = sc.task_classes[static_cast<size_t>(t)];
    set.assign(order.begin() + static_cast<int64_t>(t) * classes_per_task,
               order.begin() + static_cast<int64_t>(t + 1) * classes_per_task);
  }
  sc.validate();
  return sc;
}

Standardizer standardize_from_first_task(Dataset& dataset, const Scenario& scenario) {
  if (scenario.dataset != &dataset) {
    throw DataError("scenario does not reference the dataset being standardized");
  }
  const Standardizer s = Standardizer::fit(scenario.train_split(0).features);
  dataset.train.features = s.apply(dataset.train.features);
  dataset.test.features = s.apply(dataset.test.features);
  return s;
}

Dataset synth_clusters(int n_classes, int64_t dim, int64_t instances_per_class, double separation,
                       uint64_t seed) {
  if (n_classes < 1) throw DataError("synth_clusters needs at least one class");
  if (dim < 1) throw DataError("synth_clusters needs dim >= 1");
  if (instances_per_class < 2) throw DataError("synth_clusters needs >= 2 instances per class");
  if (separation < 0) throw DataError("separation must be non-negative");

  // Mean placement: draw directions iid N(0, I) and rescale the whole
  // constellation so the closest pair of means sits exactly `separation`
  // apart. Instance noise is unit Gaussian, so `separation` reads in sigma
  // units of the hardest class pair; raising it makes every pair easier.
  // separation 0 pins every mean to the origin (the coincident case).
  std::vector<std::vector<float>> means(static_cast<size_t>(n_classes),
                                        std::vector<float>(static_cast<size_t>(dim), 0.f));
  if (separation > 0 && n_classes > 1) {
    Rng mean_rng = Rng::derive(seed, "synth-means");
    for (auto& m : means) {
      for (auto& v : m) v = static_cast<float>(mean_rng.normal());
    }
    double min_dist = std::numeric_limits<double>::infinity();
    for (size_t a = 0; a < means.size(); ++a) {
      for (size_t b = a + 1; b < means.size(); ++b) {
        double sq = 0.0;
        for (int64_t i = 0; i < dim; ++i) {
          const double diff = means[a][static_cast<size_t>(i)] - means[b][static_cast<size_t>(i)];
          sq += diff * diff;
        }
        min_dist = std::min(min_dist, std::sqrt(sq));
      }
    }
    if (!(min_dist > 0.0)) {
      throw DataError("could not place " + std::to_string(n_classes) + " distinct cluster means in dim " +
                      std::to_string(dim));
    }
    const double rescale = separation / min_dist;
    for (auto& m : means) {
      for (auto& v : m) v = static_cast<float>(static_cast<double>(v) * rescale);
    }
  }

  const int64_t n_test = std::max<int64_t>(1, instances_per_class / 5);
  const int64_t n_train = instances_per_class - n_test;

  Rng noise = Rng::derive(seed, "synth-noise");
  std::vector<float> train_flat, test_flat;
  std::vector<int> train_labels, test_labels;
  train_flat.reserve(static_cast<size_t>(n_classes * n_train * dim));
  test_flat.reserve(static_cast<size_t>(n_classes * n_test * dim));
  for (int c = 0; c < n_classes; ++c) {
    const auto& mean = means[static_cast<size_t>(c)];
    for (int64_t i = 0; i < instances_per_class; ++i) {
      const bool is_train = i < n_train;
      auto& flat = is_train ? train_flat : test_flat;
      for (int64_t k = 0; k < dim; ++k) {
        flat.push_back(mean[static_cast<size_t>(k)] + noise.normal());
      }
      (is_train ? train_labels : test_labels).push_back(c);
    }
  }

  Partition train;
  train.features = Tensor({static_cast<int64_t>(train_labels.size()), dim}, std::move(train_flat));
  train.labels = std::move(train_labels);
  Partition test;
  test.features = Tensor({static_cast<int64_t>(test_labels.size()), dim}, std::move(test_flat));
  test.labels = std::move(test_labels);
  return make_dataset(std::move(train), std::move(test), "synth");
}

}  // namespace surprisenet
