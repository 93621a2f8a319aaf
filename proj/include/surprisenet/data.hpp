#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "surprisenet/tensor.hpp"

namespace surprisenet {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One split of a dataset: features [n, d] plus one global class label per row.
struct Partition {
  Tensor features;
  std::vector<int> labels;

  int64_t size() const { return static_cast<int64_t>(labels.size()); }
  int64_t dim() const { return features.empty() ? 0 : features.cols(); }

  // Throws DataError if features are not [n, d] with n == labels.size().
  void validate() const;
};

// Immutable after construction (standardization being the one sanctioned
// in-place rewrite, applied before any training starts).
struct Dataset {
  Partition train;
  Partition test;
  int class_count = 0;
  int64_t feature_dim = 0;
  std::string name;
};

// Validates both partitions, checks labels are non-negative and feature dims
// agree, and derives class_count as max(label) + 1.
Dataset make_dataset(Partition train, Partition test, std::string name);

// Reads one IDX image/label file pair (the classic MNIST container:
// big-endian magic + dimensions, then a uint8 payload). Pixels are flattened
// row-major and scaled to [0, 1] by division by 255.
// Throws DataError on bad magic, truncation, or image/label count mismatch.
Partition load_idx(const std::string& images_path, const std::string& labels_path);

// Reads a UTF-8 CSV with a header row. `label_column` names the integer class
// id column; every other column must parse as a float feature. Row order is
// preserved; no scaling is applied here (standardization is fit later, once
// the scenario's first task is known).
// Throws DataError on a missing label column, non-numeric cells, non-integer
// labels, or inconsistent column counts.
Partition load_csv(const std::string& path, const std::string& label_column);

// Per-feature affine map x -> (x - mean) * inv_std. Features with standard
// deviation below 1e-8 get inv_std = 1, so constant columns map to zero.
struct Standardizer {
  std::vector<float> mean;
  std::vector<float> inv_std;

  static Standardizer fit(const Tensor& features);
  Tensor apply(const Tensor& features) const;
};

// Ordered class-incremental task sequence over a dataset. Task class sets are
// pairwise disjoint and hold original dataset label ids; the position of a
// label in the concatenated task order is its classifier head index.
struct Scenario {
  const Dataset* dataset = nullptr;  // non-owning; the caller keeps it alive
  std::vector<std::vector<int>> task_classes;
  uint64_t class_order_seed = 0;

  int task_count() const { return static_cast<int>(task_classes.size()); }
  int total_classes() const;

  // Head index <-> original label id. Throw DataError for labels outside the
  // scenario or head indices out of range.
  int head_index(int label) const;
  int label_at_head(int head) const;
  int task_of_label(int label) const;
  const std::vector<int>& classes_of(int task) const;

  // Row subsets (order preserved, labels kept as original ids).
  Partition train_split(int task) const;
  Partition test_split(int task) const;
  // Union of test splits for tasks 0..through_task inclusive, in task order.
  Partition test_union(int through_task) const;

  // Scenario restricted to tasks 0..through_task (for evaluation mid-run,
  // when later tasks have not been trained yet).
  Scenario prefix(int through_task) const;

  // Checks disjointness, coverage, and that every task has at least one train
  // and one test instance. Throws DataError on violation.
  void validate() const;
};

// Shuffles the dataset's class ids 0..class_count-1 (Fisher-Yates under the
// "class-order" stream of `seed`), takes the first n_tasks*classes_per_task
// ids, and chunks them in order. Leftover classes are ignored.
Scenario make_scenario(const Dataset& dataset, int n_tasks, int classes_per_task, uint64_t seed);

// Fits a Standardizer on the rows of the scenario's FIRST task's training
// split and applies it to the whole dataset, both partitions. Called at most
// once per run, before training; statistics are frozen thereafter.
Standardizer standardize_from_first_task(Dataset& dataset, const Scenario& scenario);

// Synthetic Gaussian clusters: one unit-variance cluster per class, means
// placed at mutual distance >= separation (in within-cluster sigma units),
// split 80/20 into train/test per class. separation == 0 collapses all means
// to the origin. Throws DataError if mean placement keeps failing.
Dataset synth_clusters(int n_classes, int64_t dim, int64_t instances_per_class, double separation,
                       uint64_t seed);

}  // namespace surprisenet
