#include "chaoskit/model_json.hpp"

#include <cmath>
#include <fstream>

#include "chaoskit/error.hpp"

namespace chaoskit {

namespace {

using nlohmann::json;

double num(const json& obj, const std::string& key, const std::string& path, double fallback,
           bool required = false) {
  if (!obj.contains(key)) {
    if (required) throw LoadError(path + key, "missing");
    return fallback;
  }
  const auto& v = obj.at(key);
  if (!v.is_number()) throw LoadError(path + key, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw LoadError(path + key, "not finite");
  return x;
}

int integer(const json& obj, const std::string& key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw LoadError(key, "expected an integer");
  const auto x = v.get<long long>();
  if (x < 1 || x > 4096) throw LoadError(key, "must be in [1, 4096]");
  return static_cast<int>(x);
}

std::vector<double> matrix(const json& params, int d, int n) {
  if (!params.contains("sigma_matrix")) return {};
  const auto& m = params.at("sigma_matrix");
  std::vector<double> out;
  if (!m.is_array()) throw LoadError("params.sigma_matrix", "expected an array");
  // Accept flat or nested (row) layout.
  for (const auto& row : m) {
    if (row.is_array()) {
      for (const auto& e : row) {
        if (!e.is_number()) throw LoadError("params.sigma_matrix", "expected numbers");
        out.push_back(e.get<double>());
      }
    } else if (row.is_number()) {
      out.push_back(row.get<double>());
    } else {
      throw LoadError("params.sigma_matrix", "expected numbers");
    }
  }
  if (out.size() != static_cast<std::size_t>(d) * n)
    throw LoadError("params.sigma_matrix", "expected d*n entries");
  return out;
}

}  // namespace

ModelSpec load_model(const json& doc) {
  if (!doc.is_object()) throw LoadError("model", "expected a JSON object");
  if (!doc.contains("family") || !doc.at("family").is_string())
    throw LoadError("family", "missing or not a string");
  const std::string family = doc.at("family").get<std::string>();
  const int d = integer(doc, "d", 1);
  const int n = integer(doc, "n", d);
  const double beta = num(doc, "beta", "", 1.0);
  if (!(beta > 0.0)) throw LoadError("beta", "must be > 0");
  const json params = doc.value("params", json::object());
  if (!params.is_object()) throw LoadError("params", "expected an object");

  ModelSpec m;
  try {
    if (family == "linear") {
      LinearParams p;
      p.d = d;
      p.n = n;
      p.beta = beta;
      p.a = num(params, "a", "params.", 1.0);
      if (!(p.a > 0.0)) throw LoadError("params.a", "must be > 0");
      p.kappa = num(params, "kappa", "params.", 0.0);
      p.sigma_scale = num(params, "sigma_scale", "params.", 0.0);
      p.sigma_matrix = matrix(params, d, n);
      m = make_linear_model(p);
    } else if (family == "double_well") {
      DoubleWellParams p;
      p.d = d;
      p.n = n;
      p.beta = beta;
      p.kappa = num(params, "kappa", "params.", 0.0);
      p.sigma_scale = num(params, "sigma_scale", "params.", 0.0);
      p.sigma_matrix = matrix(params, d, n);
      p.fit_K2 = num(params, "fit_K2", "params.", 1.0);
      if (!(p.fit_K2 > 0.0)) throw LoadError("params.fit_K2", "must be > 0");
      p.fit_extent = num(params, "fit_extent", "params.", 5.0);
      if (!(p.fit_extent > 0.0)) throw LoadError("params.fit_extent", "must be > 0");
      m = make_double_well_model(p);
    } else {
      throw LoadError("family", "unknown family '" + family + "'");
    }
  } catch (const DomainError& e) {
    throw LoadError("params", e.what());
  }

  // Declared constants replace the certified ones; the model then counts as
  // unverified until an audit passes.
  if (doc.contains("constants")) {
    const auto& c = doc.at("constants");
    if (!c.is_object()) throw LoadError("constants", "expected an object");
    ModelConstants k = m.constants;
    k.K1 = num(c, "K1", "constants.", k.K1);
    k.K2 = num(c, "K2", "constants.", k.K2);
    k.R = num(c, "R", "constants.", k.R);
    k.Kb = num(c, "Kb", "constants.", k.Kb);
    k.Ksigma = num(c, "Ksigma", "constants.", k.Ksigma);
    if (!(k.K1 >= 0.0)) throw LoadError("constants.K1", "must be >= 0");
    if (!(k.K2 > 0.0)) throw LoadError("constants.K2", "must be > 0");
    if (!(k.R > 0.0)) throw LoadError("constants.R", "must be > 0");
    if (!(k.Kb >= 0.0)) throw LoadError("constants.Kb", "must be >= 0");
    if (!(k.Ksigma >= 0.0)) throw LoadError("constants.Ksigma", "must be >= 0");
    m.constants = k;
    m.certified = false;
    m.profile = DissipativityProfile::piecewise(k.K1, k.K2, k.R);
  }

  if (doc.contains("profile")) {
    const auto& p = doc.at("profile");
    if (!p.is_object() || !p.contains("kind") || !p.at("kind").is_string())
      throw LoadError("profile.kind", "missing or not a string");
    const std::string kind = p.at("kind").get<std::string>();
    if (kind == "piecewise") {
      m.profile = DissipativityProfile::piecewise(m.constants.K1, m.constants.K2, m.constants.R);
    } else if (kind == "linear") {
      // gamma(r) = -slope r
      const double slope = num(p, "slope", "profile.", m.constants.K2);
      if (!(slope > 0.0)) throw LoadError("profile.slope", "must be > 0");
      m.profile = DissipativityProfile::override_fn([slope](double r) { return -slope * r; },
                                                    slope, 0.0, "linear");
      m.constants.K2 = slope;
    } else {
      throw LoadError("profile.kind", "unknown kind '" + kind + "'");
    }
  }
  m.validate();
  return m;
}

ModelSpec load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("model", "cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw LoadError("model", std::string("malformed JSON: ") + e.what());
  }
  return load_model(doc);
}

nlohmann::json constants_to_json(const ModelConstants& c) {
  return {{"K1", c.K1}, {"K2", c.K2}, {"R", c.R}, {"Kb", c.Kb}, {"Ksigma", c.Ksigma}};
}

}  // namespace chaoskit
