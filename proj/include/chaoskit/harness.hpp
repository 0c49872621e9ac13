#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "chaoskit/config.hpp"

namespace chaoskit {

inline constexpr const char* kVersion = "chaoskit 0.3.0";

enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitBlowUp = 3, kExitOther = 4 };

struct RunOptions {
  std::optional<std::string> kind;  // subcommand; overrides the config's kind
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  int threads = 0;  // 0: CHAOSKIT_THREADS, else the OpenMP default
  std::function<void(const struct RunRecord&)> on_done;
};

struct RunRecord {
  nlohmann::json config;
  std::string version;
  double wall_clock = 0.0;
  nlohmann::json digests = nlohmann::json::object();  // file name -> sha256
  nlohmann::json summary;
};

nlohmann::json to_json(const RunRecord& r);

// Runs one experiment and writes its CSVs, report.json and run_record.json
// into cfg.out. Throws like the experiment does.
RunRecord execute(const ExperimentConfig& cfg, std::ostream* log = nullptr);

// Loads, applies overrides, executes, and maps failures to exit codes:
// 0 done, 2 invalid config, 3 numeric blow-up, 4 anything else.
int run(const std::filesystem::path& config_path, const RunOptions& opt, std::ostream& log);

int resolve_threads(int requested);

}  // namespace chaoskit
