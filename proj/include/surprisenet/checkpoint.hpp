#pragma once

#include <string>

#include "surprisenet/model.hpp"
#include "surprisenet/serialize.hpp"

namespace surprisenet {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Binary container: magic "SNCP", a version word, a JSON metadata block
// (model config, task registry, layer table, PRNG name, plus caller-supplied
// extras), then per layer: weights, assignment map, live bias and bias
// snapshots. Little-endian throughout; no timestamps, so identical state
// writes identical bytes.
void save_checkpoint(const HybridModel& model, const std::string& path,
                     const json& extra = json::object());

// Rebuilds the model (architecture from metadata) and restores every weight,
// assignment, bias and snapshot. extra_out, if given, receives the metadata
// extras stored at save time.
HybridModel load_checkpoint(const std::string& path, json* extra_out = nullptr);

// Metadata plus per-layer assignment summaries — no weight payloads.
json inspect_checkpoint(const std::string& path);

}  // namespace surprisenet
