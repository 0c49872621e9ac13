#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "chaoskit/sde.hpp"

namespace chaoskit {

inline const std::vector<std::string> kExperimentKinds = {
    "constants", "couple", "poc",    "poc-eta", "uniform-time",
    "lln",       "gronwall", "duhamel", "moments", "simulate"};

bool kind_needs_model(const std::string& kind);

struct ExperimentConfig {
  std::string kind;
  nlohmann::json model;  // resolved model document; null for model-free kinds
  std::vector<std::size_t> N = {8, 16, 32, 64};
  std::size_t k = 1;
  double eta = 1.0;
  double T = 1.0;
  double dt = 1e-2;
  std::size_t record_every = 1;
  std::size_t M = 512;
  std::size_t N_ref = 0;  // 0 selects 8 x max N
  std::uint64_t seed = 0;
  std::string out = "out";
  std::string coupling = "auto";
  InitSpec init;
  std::optional<InitSpec> limit_init;
  nlohmann::json params = nlohmann::json::object();  // kind-specific knobs

  std::size_t max_N() const;
  std::size_t reference_size() const { return N_ref ? N_ref : 8 * max_N(); }
  void validate() const;  // throws LoadError naming the field
};

// `base` resolves a model given as a relative path.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base = {});
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const ExperimentConfig& cfg);
nlohmann::json to_json(const InitSpec& init);
InitSpec parse_init(const nlohmann::json& doc, const std::string& field);

}  // namespace chaoskit
