// Python bindings: the core numeric operations plus an end-to-end pipeline
// entry point. Arrays cross the boundary as NumPy float32.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "surprisenet/data.hpp"
#include "surprisenet/masked.hpp"
#include "surprisenet/ops.hpp"
#include "surprisenet/rng.hpp"
#include "surprisenet/runner.hpp"

namespace py = pybind11;
using namespace surprisenet;
using namespace surprisenet::ops;

namespace {

Tensor tensor_from(const py::array_t<float, py::array::c_style | py::array::forcecast>& arr) {
  std::vector<int64_t> shape(static_cast<size_t>(arr.ndim()));
  for (py::ssize_t i = 0; i < arr.ndim(); ++i) shape[static_cast<size_t>(i)] = arr.shape(i);
  std::vector<float> values(static_cast<size_t>(arr.size()));
  std::copy(arr.data(), arr.data() + arr.size(), values.begin());
  return Tensor(std::move(shape), std::move(values));
}

py::array_t<float> tensor_to(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  py::array_t<float> arr(shape);
  std::copy(t.data(), t.data() + t.size(), arr.mutable_data());
  return arr;
}

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Replay-free class-incremental learning core";
  m.attr("PRNG_NAME") = kPrngName;

  m.def("matmul", [](const FloatArray& a, const FloatArray& b) {
    return tensor_to(matmul(tensor_from(a), tensor_from(b)));
  }, py::arg("a"), py::arg("b"), "Row-major float32 matrix product");

  m.def("relu", [](const FloatArray& x) { return tensor_to(relu(tensor_from(x))); }, py::arg("x"));

  m.def("mse_loss", [](const FloatArray& x, const FloatArray& x_hat) {
    return mse(tensor_from(x), tensor_from(x_hat));
  }, py::arg("x"), py::arg("x_hat"), "Mean squared error over all elements");

  m.def("cross_entropy_loss", [](const FloatArray& logits, const std::vector<int>& labels) {
    return cross_entropy(tensor_from(logits), labels);
  }, py::arg("logits"), py::arg("labels"), "Mean softmax cross-entropy");

  m.def("kl_standard_normal", [](const FloatArray& mu, const FloatArray& log_var) {
    return kl_standard_normal(tensor_from(mu), tensor_from(log_var));
  }, py::arg("mu"), py::arg("log_var"), "KL(q || N(0, I)), summed over dims, averaged over rows");

  m.def("reparameterize", [](const FloatArray& mu, const FloatArray& log_var, const FloatArray& noise) {
    return tensor_to(reparameterize(tensor_from(mu), tensor_from(log_var), tensor_from(noise)));
  }, py::arg("mu"), py::arg("log_var"), py::arg("noise"));

  m.def("eqprune_lambda", &eqprune_lambda, py::arg("task_position"), py::arg("total_tasks"),
        "Equal-capacity prune proportion for 1-based task position t of T");

  m.def("prune_count", &prune_count, py::arg("prune_proportion"), py::arg("candidates"),
        "How many candidate weights a prune step releases");

  m.def("synth_clusters", [](int n_classes, int64_t dim, int64_t instances_per_class,
                             double separation, uint64_t seed) {
    const Dataset ds = synth_clusters(n_classes, dim, instances_per_class, separation, seed);
    py::dict out;
    out["train_x"] = tensor_to(ds.train.features);
    out["train_y"] = py::cast(ds.train.labels);
    out["test_x"] = tensor_to(ds.test.features);
    out["test_y"] = py::cast(ds.test.labels);
    out["class_count"] = ds.class_count;
    return out;
  }, py::arg("n_classes"), py::arg("dim"), py::arg("instances_per_class"), py::arg("separation"),
     py::arg("seed"), "Gaussian-cluster dataset with an 80/20 train/test split");

  m.def("run_experiment", [](const std::string& config_json) {
    const json cfg = json::parse(config_json);
    return run_from_json(cfg).dump();
  }, py::arg("config_json"),
     "Run the full train/prune/retrain/freeze pipeline; returns the report as a JSON string");
}
