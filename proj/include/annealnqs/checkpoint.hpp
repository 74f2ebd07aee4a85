#pragma once

#include <string>

#include <json.hpp>

#include "annealnqs/rbm.hpp"
#include "annealnqs/reference.hpp"
#include "annealnqs/sr.hpp"

namespace annealnqs {

/// {"n_visible": N, "n_hidden": M, "values": [a | b | W row-major]}
nlohmann::json params_to_json(const RbmParams& params);
RbmParams params_from_json(const nlohmann::json& j);

nlohmann::json state_to_json(const TrainState& state);
TrainState state_from_json(const nlohmann::json& j);

nlohmann::json reference_to_json(const ReferenceResult& result);

void write_json_file(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::string& path);

}  // namespace annealnqs
