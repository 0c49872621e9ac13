#include "chaoskit/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "chaoskit/error.hpp"

namespace chaoskit {

using nlohmann::json;

bool kind_needs_model(const std::string& kind) {
  return kind != "lln" && kind != "gronwall" && kind != "duhamel";
}

namespace {

double number(const json& doc, const std::string& key, double fallback) {
  if (!doc.contains(key)) return fallback;
  const auto& v = doc.at(key);
  if (!v.is_number()) throw LoadError(key, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw LoadError(key, "not finite");
  return x;
}

std::size_t count(const json& doc, const std::string& key, std::size_t fallback) {
  if (!doc.contains(key)) return fallback;
  const auto& v = doc.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw LoadError(key, "expected a nonnegative integer");
  return v.get<std::size_t>();
}

std::vector<double> numbers(const json& v, const std::string& field) {
  if (!v.is_array()) throw LoadError(field, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw LoadError(field, "expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace

InitSpec parse_init(const json& doc, const std::string& field) {
  if (!doc.is_object()) throw LoadError(field, "expected an object");
  InitSpec s;
  try {
    s.kind = parse_init_kind(doc.value("kind", std::string("gaussian")));
  } catch (const DomainError& e) {
    throw LoadError(field + ".kind", e.what());
  } catch (const json::exception&) {
    throw LoadError(field + ".kind", "expected a string");
  }
  if (doc.contains("center")) s.center = numbers(doc.at("center"), field + ".center");
  if (doc.contains("scale")) {
    if (!doc.at("scale").is_number()) throw LoadError(field + ".scale", "expected a number");
    s.scale = doc.at("scale").get<double>();
  }
  if (doc.contains("components")) {
    const auto& cs = doc.at("components");
    if (!cs.is_array()) throw LoadError(field + ".components", "expected an array");
    for (const auto& c : cs) {
      if (!c.is_object()) throw LoadError(field + ".components", "expected objects");
      InitSpec::Component comp;
      comp.weight = c.value("weight", 1.0);
      comp.std = c.value("std", 1.0);
      if (c.contains("mean")) comp.mean = numbers(c.at("mean"), field + ".components.mean");
      s.components.push_back(std::move(comp));
    }
  }
  return s;
}

json to_json(const InitSpec& s) {
  static const char* names[] = {"point", "gaussian", "uniform_box", "mixture"};
  json j;
  j["kind"] = names[static_cast<int>(s.kind)];
  if (!s.center.empty()) j["center"] = s.center;
  j["scale"] = s.scale;
  if (!s.components.empty()) {
    j["components"] = json::array();
    for (const auto& c : s.components)
      j["components"].push_back({{"weight", c.weight}, {"mean", c.mean}, {"std", c.std}});
  }
  return j;
}

std::size_t ExperimentConfig::max_N() const {
  return N.empty() ? 0 : *std::max_element(N.begin(), N.end());
}

void ExperimentConfig::validate() const {
  if (std::find(kExperimentKinds.begin(), kExperimentKinds.end(), kind) == kExperimentKinds.end())
    throw LoadError("kind", "unknown experiment kind '" + kind + "'");
  if (kind_needs_model(kind) && model.is_null()) throw LoadError("model", "missing");
  if (N.empty()) throw LoadError("N", "must not be empty");
  for (std::size_t n : N)
    if (n < 1) throw LoadError("N", "entries must be >= 1");
  if (k < 1) throw LoadError("k", "must be >= 1");
  if (k > *std::min_element(N.begin(), N.end())) throw LoadError("k", "must not exceed min(N)");
  if (!(eta > 0.0 && eta <= 1.0)) throw LoadError("eta", "must lie in (0, 1]");
  if (!(T > 0.0)) throw LoadError("T", "must be > 0");
  if (!(dt > 0.0)) throw LoadError("dt", "must be > 0");
  if (std::abs(std::round(T / dt) * dt - T) > 1e-9 * std::max(1.0, T))
    throw LoadError("dt", "T must be a multiple of dt");
  if (record_every < 1) throw LoadError("record_every", "must be >= 1");
  if (M < 1) throw LoadError("M", "must be >= 1");
  if (coupling != "auto") {
    static const std::set<std::string> ok = {"synchronous", "maximal_reflection", "threshold",
                                             "smoothed"};
    if (!ok.count(coupling)) throw LoadError("coupling", "unknown mode '" + coupling + "'");
  }
  if (out.empty()) throw LoadError("out", "must not be empty");
  if (!params.is_object()) throw LoadError("params", "expected an object");
}

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base) {
  if (!doc.is_object()) throw LoadError("config", "expected a JSON object");
  static const std::set<std::string> known = {
      "kind", "model", "N", "k", "eta", "T", "dt", "record_every", "M", "N_ref",
      "seed", "out", "coupling", "init", "limit_init", "params"};
  for (const auto& [key, _] : doc.items())
    if (!known.count(key)) throw LoadError(key, "unknown field");

  ExperimentConfig c;
  if (doc.contains("kind")) {
    if (!doc.at("kind").is_string()) throw LoadError("kind", "expected a string");
    c.kind = doc.at("kind").get<std::string>();
  }
  if (doc.contains("model")) {
    const auto& m = doc.at("model");
    if (m.is_string()) {
      std::filesystem::path p = m.get<std::string>();
      if (p.is_relative() && !base.empty()) p = base / p;
      std::ifstream in(p);
      if (!in) throw LoadError("model", "cannot open " + p.string());
      try {
        c.model = json::parse(in);
      } catch (const json::parse_error& e) {
        throw LoadError("model", std::string("malformed JSON: ") + e.what());
      }
    } else if (m.is_object()) {
      c.model = m;
    } else {
      throw LoadError("model", "expected an object or a path");
    }
  }
  if (doc.contains("N")) {
    const auto& n = doc.at("N");
    if (n.is_number_integer()) {
      c.N = {count(doc, "N", 0)};
    } else if (n.is_array()) {
      c.N.clear();
      for (const auto& e : n) {
        if (!e.is_number_integer() || e.get<long long>() < 1)
          throw LoadError("N", "expected positive integers");
        c.N.push_back(e.get<std::size_t>());
      }
    } else {
      throw LoadError("N", "expected an integer or an array");
    }
  }
  c.k = count(doc, "k", c.k);
  c.eta = number(doc, "eta", c.eta);
  c.T = number(doc, "T", c.T);
  c.dt = number(doc, "dt", c.dt);
  c.record_every = count(doc, "record_every", c.record_every);
  c.M = count(doc, "M", c.M);
  c.N_ref = count(doc, "N_ref", c.N_ref);
  if (doc.contains("seed")) {
    const auto& v = doc.at("seed");
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
      throw LoadError("seed", "expected an unsigned integer");
    c.seed = doc.at("seed").get<std::uint64_t>();
  }
  if (doc.contains("out")) {
    if (!doc.at("out").is_string()) throw LoadError("out", "expected a string");
    c.out = doc.at("out").get<std::string>();
  }
  if (doc.contains("coupling")) {
    if (!doc.at("coupling").is_string()) throw LoadError("coupling", "expected a string");
    c.coupling = doc.at("coupling").get<std::string>();
  }
  if (doc.contains("init")) c.init = parse_init(doc.at("init"), "init");
  if (doc.contains("limit_init")) c.limit_init = parse_init(doc.at("limit_init"), "limit_init");
  if (doc.contains("params")) c.params = doc.at("params");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("config", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw LoadError("config", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc, path.parent_path());
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["kind"] = c.kind;
  j["model"] = c.model;
  j["N"] = c.N;
  j["k"] = c.k;
  j["eta"] = c.eta;
  j["T"] = c.T;
  j["dt"] = c.dt;
  j["record_every"] = c.record_every;
  j["M"] = c.M;
  j["N_ref"] = c.reference_size();
  j["seed"] = c.seed;
  j["out"] = c.out;
  j["coupling"] = c.coupling;
  j["init"] = to_json(c.init);
  if (c.limit_init) j["limit_init"] = to_json(*c.limit_init);
  j["params"] = c.params;
  return j;
}

}  // namespace chaoskit
