#pragma once

// JSON representations of the parameter and integrator configuration types.
// Parsing rejects unknown keys; missing keys keep their defaults.

#include <string>

#include <json.hpp>

#include "copo/model.hpp"
#include "copo/sde.hpp"

namespace copo {

nlohmann::json params_to_json(const SystemParams& p);
/// Fields absent from `j` keep the values already in `p`.
void params_from_json(const nlohmann::json& j, SystemParams& p);

nlohmann::json sde_config_to_json(const SdeConfig& c);
void sde_config_from_json(const nlohmann::json& j, SdeConfig& c);

/// Throws InvalidParameters naming the first key of `j` not in `allowed`.
void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                         const std::string& context);

}  // namespace copo
