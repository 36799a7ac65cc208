#pragma once

#include <json.hpp>

#include "gaitdict/learners.hpp"

namespace gaitdict::detail {

nlohmann::json spec_to_json(const ClassifierSpec& spec);
ClassifierSpec spec_from_json(const nlohmann::json& j);
nlohmann::json model_to_json_value(const TrainedModel& model);
TrainedModel model_from_json_value(const nlohmann::json& j);

}  // namespace gaitdict::detail
