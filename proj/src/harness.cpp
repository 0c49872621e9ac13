#include "chaoskit/harness.hpp"

#include <chrono>
#include <cstdlib>
#include <ostream>

#include "chaoskit/csv.hpp"
#include "chaoskit/digest.hpp"
#include "chaoskit/error.hpp"
#include "chaoskit/experiments.hpp"
#include "chaoskit/kernels.hpp"

namespace chaoskit {

using nlohmann::json;

json to_json(const RunRecord& r) {
  return {{"config", r.config},     {"version", r.version}, {"wall_clock_seconds", r.wall_clock},
          {"digests", r.digests},   {"summary", r.summary}};
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CHAOSKIT_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return 0;
}

RunRecord execute(const ExperimentConfig& cfg, std::ostream* log) {
  cfg.validate();
  const std::filesystem::path dir = cfg.out;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw Error("cannot create output directory " + dir.string());

  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentOutput res = run_experiment(cfg);
  const auto t1 = std::chrono::steady_clock::now();

  RunRecord rec;
  rec.config = to_json(cfg);
  rec.version = kVersion;
  rec.wall_clock = std::chrono::duration<double>(t1 - t0).count();
  rec.summary = res.report;
  for (const auto& [name, content] : res.files) {
    write_file_atomic(dir / name, content);
    rec.digests[name] = sha256_hex(content);
  }
  const std::string report = res.report.dump(2) + "\n";
  write_file_atomic(dir / "report.json", report);
  rec.digests["report.json"] = sha256_hex(report);
  write_file_atomic(dir / "run_record.json", to_json(rec).dump(2) + "\n");
  if (log)
    for (const auto& w : res.warnings) *log << "warning: " << w << "\n";
  return rec;
}

int run(const std::filesystem::path& config_path, const RunOptions& opt, std::ostream& log) {
  try {
    ExperimentConfig cfg = load_config(config_path);
    if (opt.kind) cfg.kind = *opt.kind;
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.out) cfg.out = *opt.out;
    set_threads(resolve_threads(opt.threads));
    const auto rec = execute(cfg, &log);
    if (opt.on_done) opt.on_done(rec);
    log << cfg.kind << ": wrote " << rec.digests.size() << " files to " << cfg.out << "\n";
    return kExitOk;
  } catch (const LoadError& e) {
    log << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DomainError& e) {
    log << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DivergenceError& e) {
    log << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericError& e) {
    log << "error: " << e.what() << "\n";
    return kExitBlowUp;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitOther;
  }
}

}  // namespace chaoskit
