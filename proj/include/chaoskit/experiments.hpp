#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "chaoskit/config.hpp"

namespace chaoskit {

// Everything an experiment produces. Files are (name, content); nothing in
// them depends on timing or on the thread count.
struct ExperimentOutput {
  nlohmann::json report = nlohmann::json::object();
  std::vector<std::pair<std::string, std::string>> files;
  std::vector<std::string> warnings;
};

ExperimentOutput run_experiment(const ExperimentConfig& cfg);

ExperimentOutput constants_experiment(const ExperimentConfig& cfg);
ExperimentOutput coupling_experiment(const ExperimentConfig& cfg);
// poc, poc-eta and uniform-time share one pipeline.
ExperimentOutput chaos_experiment(const ExperimentConfig& cfg);
ExperimentOutput lln_experiment(const ExperimentConfig& cfg);
ExperimentOutput gronwall_experiment(const ExperimentConfig& cfg);
ExperimentOutput duhamel_experiment(const ExperimentConfig& cfg);
ExperimentOutput moments_experiment(const ExperimentConfig& cfg);
ExperimentOutput simulate_experiment(const ExperimentConfig& cfg);

}  // namespace chaoskit
