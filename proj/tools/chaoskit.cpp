#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "chaoskit/config.hpp"
#include "chaoskit/harness.hpp"

namespace {

void print_constants(const chaoskit::RunRecord& rec) {
  const auto& s = rec.summary;
  std::printf("%-28s %s\n", "quantity", "value");
  for (const auto& [k, v] : s["constants"].items())
    if (v.is_number()) std::printf("%-28s %.12g\n", k.c_str(), v.get<double>());
  for (const auto& [k, v] : s["hypotheses"].items()) {
    if (v.is_number())
      std::printf("%-28s %.12g\n", k.c_str(), v.get<double>());
    else if (v.is_boolean())
      std::printf("%-28s %s\n", k.c_str(), v.get<bool>() ? "yes" : "no");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field particle systems: contraction constants, couplings, chaos rates"};
  app.require_subcommand(1);

  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  int threads = 0;
  std::string chosen;

  auto add = [&](const std::string& name, const std::string& help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--out", out, "output directory (overrides the config)");
    sub->add_option("--threads", threads, "worker threads (falls back to CHAOSKIT_THREADS)")
        ->check(CLI::PositiveNumber);
    sub->callback([&chosen, name] { chosen = name; });
    return sub;
  };
  add("constants", "contraction constants, thresholds and kappa0");
  add("simulate", "simulate the particle system");
  add("couple", "reflection coupling of the decoupled SDE");
  add("poc", "propagation-of-chaos rate in N");
  add("poc-eta", "propagation of chaos in W_eta");
  add("uniform-time", "no-growth check of W1(t)");
  add("lln", "law-of-large-numbers gap");
  add("gronwall", "generalized Gronwall bound");
  add("duhamel", "Duhamel identity residual");
  add("moments", "second-moment curve");
  add("run", "dispatch on the config's kind");

  CLI11_PARSE(app, argc, argv);

  chaoskit::RunOptions opt;
  if (chosen != "run") opt.kind = chosen;
  if (app.get_subcommand(chosen)->count("--seed")) opt.seed = seed;
  if (!out.empty()) opt.out = out;
  opt.threads = threads;
  if (chosen == "constants") opt.on_done = print_constants;
  return chaoskit::run(config, opt, std::cerr);
}
