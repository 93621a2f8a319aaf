#include "surprisenet/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "surprisenet/rng.hpp"

namespace surprisenet {

namespace {

constexpr char kMagic[4] = {'S', 'N', 'C', 'P'};
constexpr uint32_t kVersion = 1;

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<uint32_t>(f)); }

void put_tensor(std::string& out, const Tensor& t) {
  put_u64(out, static_cast<uint64_t>(t.size()));
  for (int64_t i = 0; i < t.size(); ++i) put_f32(out, t[i]);
}

class Reader {
 public:
  Reader(const std::string& bytes, std::string path) : bytes_(bytes), path_(std::move(path)) {}

  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<uint8_t>(bytes_[pos_ + static_cast<size_t>(i)])) << (8 * i);
    pos_ += 4;
    return v;
  }

  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<uint8_t>(bytes_[pos_ + static_cast<size_t>(i)])) << (8 * i);
    pos_ += 8;
    return v;
  }

  float f32() { return std::bit_cast<float>(u32()); }

  std::string raw(uint64_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  Tensor tensor(std::vector<int64_t> shape) {
    const uint64_t count = u64();
    if (count != static_cast<uint64_t>(shape_size(shape))) {
      throw CheckpointError(path_ + ": tensor size " + std::to_string(count) +
                            " does not match expected shape " + shape_str(shape));
    }
    std::vector<float> values(count);
    for (auto& v : values) v = f32();
    return Tensor(std::move(shape), std::move(values));
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(uint64_t n) {
    if (pos_ + n > bytes_.size()) throw CheckpointError(path_ + ": truncated checkpoint");
  }

  const std::string& bytes_;
  std::string path_;
  size_t pos_ = 0;
};

json meta_json(const HybridModel& model, const json& extra) {
  const TaskRegistry& reg = model.registry();
  json meta;
  meta["config"] = model_config_to_json(model.config());
  meta["registry"] = json{{"current_task", reg.current_task},
                          {"total_tasks_planned", reg.total_tasks_planned},
                          {"trained_since_freeze", reg.trained_since_freeze}};
  meta["layers"] = model.layer_names();
  meta["prng"] = kPrngName;
  meta["extra"] = extra;
  return meta;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(path + ": cannot open");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

// Shared front half of load/inspect: header + metadata block.
json read_meta(Reader& reader, const std::string& path) {
  const std::string magic = reader.raw(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) {
    throw CheckpointError(path + ": not a checkpoint file (bad magic)");
  }
  const uint32_t version = reader.u32();
  if (version != kVersion) {
    throw CheckpointError(path + ": unsupported checkpoint version " + std::to_string(version));
  }
  const uint64_t meta_len = reader.u64();
  const std::string meta_bytes = reader.raw(meta_len);
  json meta = json::parse(meta_bytes, nullptr, false);
  if (meta.is_discarded()) throw CheckpointError(path + ": corrupt metadata block");
  return meta;
}

}  // namespace

void save_checkpoint(const HybridModel& model, const std::string& path, const json& extra) {
  std::string out;
  out.append(kMagic, 4);
  put_u32(out, kVersion);

  const std::string meta = meta_json(model, extra).dump();
  put_u64(out, meta.size());
  out.append(meta);

  for (const MaskedLinearLayer* layer : model.layers()) {
    put_tensor(out, layer->weights());
    const auto& assign = layer->assignment();
    put_u64(out, assign.size());
    out.append(reinterpret_cast<const char*>(assign.data()), assign.size());
    put_tensor(out, layer->live_bias());
    put_u32(out, static_cast<uint32_t>(layer->snapshot_count()));
    for (int k = 0; k < layer->snapshot_count(); ++k) put_tensor(out, layer->bias_snapshot(k));
  }

  std::ofstream file(path, std::ios::binary);
  if (!file) throw CheckpointError(path + ": cannot open for writing");
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw CheckpointError(path + ": write failed");
}

HybridModel load_checkpoint(const std::string& path, json* extra_out) {
  const std::string bytes = read_file(path);
  Reader reader(bytes, path);
  const json meta = read_meta(reader, path);

  const ModelConfig cfg = model_config_from_json(meta.at("config"));
  const json& reg_json = meta.at("registry");
  HybridModel model(cfg, reg_json.at("total_tasks_planned").get<int>());
  model.registry().current_task = reg_json.at("current_task").get<int>();
  model.registry().trained_since_freeze = reg_json.at("trained_since_freeze").get<bool>();

  const auto names = meta.at("layers").get<std::vector<std::string>>();
  if (names != model.layer_names()) {
    throw CheckpointError(path + ": layer table does not match the stored architecture");
  }

  for (MaskedLinearLayer* layer : model.layers()) {
    layer->weights() = reader.tensor({layer->out_dim(), layer->in_dim()});
    const uint64_t assign_count = reader.u64();
    if (assign_count != static_cast<uint64_t>(layer->weight_count())) {
      throw CheckpointError(path + ": assignment map size mismatch");
    }
    const std::string assign_bytes = reader.raw(assign_count);
    layer->assignment().assign(assign_bytes.begin(), assign_bytes.end());
    layer->live_bias() = reader.tensor({layer->out_dim()});
    const uint32_t snapshots = reader.u32();
    layer->bias_snapshots().clear();
    for (uint32_t k = 0; k < snapshots; ++k) {
      layer->bias_snapshots().push_back(reader.tensor({layer->out_dim()}));
    }
  }
  if (!reader.done()) throw CheckpointError(path + ": trailing bytes after payload");

  if (extra_out != nullptr) *extra_out = meta.at("extra");
  return model;
}

json inspect_checkpoint(const std::string& path) {
  const std::string bytes = read_file(path);
  Reader reader(bytes, path);
  json meta = read_meta(reader, path);

  // Walk the payload for per-layer summaries without keeping the weights.
  const ModelConfig cfg = model_config_from_json(meta.at("config"));
  HybridModel shape_probe(cfg, meta.at("registry").at("total_tasks_planned").get<int>());
  const int total_tasks = meta.at("registry").at("total_tasks_planned").get<int>();

  json layers = json::array();
  const auto names = meta.at("layers").get<std::vector<std::string>>();
  auto probe_layers = shape_probe.layers();
  if (names.size() != probe_layers.size()) {
    throw CheckpointError(path + ": layer table does not match the stored architecture");
  }
  for (size_t li = 0; li < probe_layers.size(); ++li) {
    const MaskedLinearLayer* probe = probe_layers[li];
    const Tensor weights = reader.tensor({probe->out_dim(), probe->in_dim()});
    double abs_sum = 0.0;
    for (int64_t i = 0; i < weights.size(); ++i) abs_sum += std::abs(weights[i]);
    const uint64_t assign_count = reader.u64();
    const std::string assign_bytes = reader.raw(assign_count);
    reader.tensor({probe->out_dim()});  // live bias
    const uint32_t snapshots = reader.u32();
    for (uint32_t k = 0; k < snapshots; ++k) reader.tensor({probe->out_dim()});

    std::vector<int64_t> counts(static_cast<size_t>(total_tasks) + 1, 0);
    for (char c : assign_bytes) {
      const uint8_t a = static_cast<uint8_t>(c);
      if (a == kFree) {
        ++counts.back();
      } else if (a < counts.size() - 1) {
        ++counts[a];
      } else {
        throw CheckpointError(path + ": assignment references unknown task " + std::to_string(a));
      }
    }
    json entry;
    entry["name"] = names[li];
    entry["shape"] = std::vector<int64_t>{probe->out_dim(), probe->in_dim()};
    entry["assigned_per_task"] = std::vector<int64_t>(counts.begin(), counts.end() - 1);
    entry["free"] = counts.back();
    entry["bias_snapshots"] = snapshots;
    entry["mean_abs_weight"] =
        weights.size() == 0 ? 0.0 : abs_sum / static_cast<double>(weights.size());
    layers.push_back(entry);
  }
  meta["layer_summary"] = layers;
  return meta;
}

}  // namespace surprisenet
