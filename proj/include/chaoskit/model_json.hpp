#pragma once

#include <string>

#include <json.hpp>

#include "chaoskit/model.hpp"

namespace chaoskit {

// {"family": "linear" | "double_well", "d", "n", "beta",
//  "params": {...}, "constants": {...}, "profile": {...}}
// Errors are LoadError naming the offending field.
ModelSpec load_model(const nlohmann::json& doc);
ModelSpec load_model_file(const std::string& path);

nlohmann::json constants_to_json(const ModelConstants& c);

}  // namespace chaoskit
