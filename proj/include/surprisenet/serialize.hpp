#pragma once

#include "json.hpp"
#include "surprisenet/data.hpp"
#include "surprisenet/model.hpp"
#include "surprisenet/trainer.hpp"

namespace surprisenet {

using json = nlohmann::json;

json model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const json& j);

json plan_to_json(const TrainPlan& plan);
TrainPlan plan_from_json(const json& j);

// Class sets, ordering seed, and dataset name — enough to audit a run or to
// rebuild the scenario against the same dataset.
json scenario_to_json(const Scenario& scenario);

}  // namespace surprisenet
