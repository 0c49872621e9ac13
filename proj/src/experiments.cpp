#include "chaoskit/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <numbers>
#include <set>

#include "chaoskit/analysis.hpp"
#include "chaoskit/constants.hpp"
#include "chaoskit/coupling.hpp"
#include "chaoskit/csv.hpp"
#include "chaoskit/error.hpp"
#include "chaoskit/model_json.hpp"
#include "chaoskit/numeric.hpp"
#include "chaoskit/stats.hpp"
#include "chaoskit/transport.hpp"

namespace chaoskit {

using nlohmann::json;

namespace {

template <class T>
T param(const ExperimentConfig& cfg, const std::string& key, T fallback) {
  if (!cfg.params.contains(key)) return fallback;
  try {
    return cfg.params.at(key).get<T>();
  } catch (const json::exception&) {
    throw LoadError("params." + key, "has the wrong type");
  }
}

json fit_json(const RateFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"halfwidth", f.halfwidth},
          {"r2", f.r2}, {"points", f.n}};
}

SimConfig sim_config(const ExperimentConfig& cfg, std::uint64_t seed, std::size_t record_every) {
  SimConfig s;
  s.dt = cfg.dt;
  s.T = cfg.T;
  s.seed = seed;
  s.record_every = record_every;
  return s;
}

// A one-point flow for models whose coefficients ignore the measure.
MeasureFlow trivial_flow(int d) {
  MeasureFlow f;
  ParticleEnsemble e;
  e.N = 1;
  e.d = d;
  e.states.assign(d, 0.0);
  f.times.push_back(0.0);
  f.clouds.push_back(e);
  return f;
}

bool interacting(const ModelSpec& m) { return m.has_b1() || m.has_sigma(); }

std::vector<double> vec_param(const ExperimentConfig& cfg, const std::string& key,
                              std::vector<double> fallback, int d) {
  auto v = param<std::vector<double>>(cfg, key, std::move(fallback));
  if (v.size() != static_cast<std::size_t>(d))
    throw LoadError("params." + key, "expected " + std::to_string(d) + " coordinates");
  return v;
}

}  // namespace

// ---------------------------------------------------------------- constants

ExperimentOutput constants_experiment(const ExperimentConfig& cfg) {
  const ModelSpec model = load_model(cfg.model);
  const double cG = param(cfg, "cG", 1.0);
  const auto rep = check_theorem_hypotheses(model, model.profile, cG, model.d);
  const auto& c = rep.constants;

  ExperimentOutput out;
  out.report["model"] = {{"family", model.family}, {"d", model.d}, {"n", model.n},
                         {"beta", model.beta}, {"certified", model.certified},
                         {"constants", constants_to_json(model.constants)},
                         {"profile", model.profile.label()}};
  out.report["constants"] = {{"delta", c.delta},
                             {"delta_error", c.quadrature.error},
                             {"truncation_radius", c.quadrature.truncation_radius},
                             {"tail_closed_form", c.quadrature.tail_closed_form},
                             {"c_E", c.c_E},
                             {"lambda0", c.lambda0},
                             {"K2", c.K2},
                             {"Kb", c.Kb},
                             {"Ksigma", c.Ksigma},
                             {"beta", c.beta}};
  out.report["hypotheses"] = {{"cG", rep.cG},
                              {"Kb_plus_Ksigma", rep.lhs},
                              {"threshold_contraction", rep.threshold_kbs},
                              {"threshold_moment", rep.threshold_half_K2},
                              {"kappa0", rep.kappa0.kappa0},
                              {"kappa0_degenerate", rep.kappa0.degenerate},
                              {"kappa0_capped", rep.kappa0.capped},
                              {"kappa0_resolution", rep.kappa0.resolution},
                              {"gate_contraction", rep.gate_st1},
                              {"gate_moment", rep.gate_st2},
                              {"gate_theorem", rep.gate_theorem}};
  if (!model.certified) out.warnings.push_back("model constants are user-supplied, not certified");

  const FFunction f(model.profile, model.beta);
  const double rmax = param(cfg, "f_rmax", 10.0 * model.profile.tail_start() + 1.0);
  const auto grid = param<std::size_t>(cfg, "f_grid", 200);
  CsvTable tab({"r", "f", "df", "d2f", "lower", "upper"});
  for (std::size_t i = 1; i <= grid; ++i) {
    const double r = rmax * static_cast<double>(i) / static_cast<double>(grid);
    const auto v = f.eval(r);
    tab.add_row({r, v.f, v.df, v.d2f, 2.0 * model.beta / c.K2 * r, c.delta * r});
  }
  out.files.emplace_back("f.csv", tab.str());
  CsvTable ct({"name", "value"});
  for (auto& [k, v] : out.report["constants"].items())
    if (v.is_number()) ct.add_row({std::string(k), v.get<double>()});
  out.files.emplace_back("constants.csv", ct.str());
  return out;
}

// ----------------------------------------------------------------- couple

ExperimentOutput coupling_experiment(const ExperimentConfig& cfg) {
  const ModelSpec model = load_model(cfg.model);
  const int d = model.d;
  const auto x0 = vec_param(cfg, "x0", std::vector<double>(d, 1.0), d);
  const auto y0 = vec_param(cfg, "y0", std::vector<double>(d, 0.0), d);
  CouplingOptions opt;
  opt.mode = parse_coupling_mode(cfg.coupling == "auto" ? "maximal_reflection" : cfg.coupling);
  opt.epsilon = param(cfg, "epsilon", 0.0);
  opt.merge_threshold = param(cfg, "merge_threshold", 0.0);
  const double fit_from = param(cfg, "fit_from", 0.5);
  const double rate_factor = param(cfg, "rate_factor", 0.9);
  const double envelope_factor = param(cfg, "envelope_factor", 1.05);
  const double ks_level = param(cfg, "ks_level", 0.01);

  ExperimentOutput out;
  const auto consts = contraction_constants(model, model.profile);
  const double kbs = 4.0 * model.beta * model.beta / (consts.K2 * consts.delta * consts.delta);
  if (!(consts.Kb + consts.Ksigma < kbs))
    out.warnings.push_back("Kb + Ksigma is not below the contraction threshold");

  MeasureFlow flow = trivial_flow(d);
  if (interacting(model)) {
    std::string warn;
    flow = simulate_reference_flow(model, cfg.reference_size(), cfg.init,
                                   sim_config(cfg, cfg.seed ^ 0xF10Eull, 1), &warn, 0);
  }
  const FFunction f(model.profile, model.beta);
  const SimConfig sc = sim_config(cfg, cfg.seed, cfg.record_every);
  const auto tr = simulate_reflection_coupling(model, flow, x0, y0, cfg.M, sc, opt, f);

  const double z0 = std::sqrt(dist2(x0.data(), y0.data(), d));
  const double f0 = z0 > 0.0 ? f.value(z0) : 0.0;
  CsvTable tab({"t", "mean_fZ", "stderr", "mean_Z", "frac_merged", "tanaka", "bound"});
  std::vector<double> ft, fy;
  double worst = 0.0;
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    const double t = tr.times[k];
    const double bound = std::exp(-consts.lambda0 * t) * f0;
    tab.add_row({t, tr.mean_fZ[k], tr.stderr_fZ[k], tr.mean_Z[k], tr.frac_merged[k],
                 tr.tanaka[k], bound});
    if (t >= fit_from - 1e-12) {
      if (tr.mean_fZ[k] > 0.0) {
        ft.push_back(t);
        fy.push_back(tr.mean_fZ[k]);
      }
      if (bound > 0.0) worst = std::max(worst, tr.mean_fZ[k] / bound);
    }
  }
  out.files.emplace_back("coupling.csv", tab.str());
  out.report["lambda0"] = consts.lambda0;
  out.report["f_Z0"] = f0;
  out.report["mode"] = to_string(opt.mode);
  out.report["max_ratio_to_bound"] = worst;
  out.report["envelope_pass"] = worst <= envelope_factor;
  if (ft.size() >= 3) {
    const auto fit = fit_rate(ft, fy, FitScale::semilog);
    out.report["fit"] = fit_json(fit);
    out.report["rate"] = -fit.slope;
    out.report["rate_pass"] = -fit.slope >= rate_factor * consts.lambda0;
  } else {
    out.report["rate"] = nullptr;
    out.report["rate_pass"] = false;
    out.warnings.push_back("too few positive points for a rate fit");
  }
  std::size_t tau_n = 0;
  CompensatedSum tau_s;
  for (double t : tr.tau)
    if (std::isfinite(t)) {
      ++tau_n;
      tau_s.add(t);
    }
  out.report["merged_fraction"] = static_cast<double>(tau_n) / static_cast<double>(tr.M);
  out.report["mean_tau_merged"] = tau_n ? tau_s.value() / static_cast<double>(tau_n) : 0.0;

  // Marginal check: leg 2 against independent copies of the decoupled SDE from y0.
  const auto ks_times = param<std::size_t>(cfg, "ks_times", 3);
  if (ks_times > 0 && tr.times.size() > 1) {
    std::vector<double> z(cfg.M * d);
    for (std::size_t m = 0; m < cfg.M; ++m) std::copy(y0.begin(), y0.end(), z.begin() + m * d);
    const auto ref = simulate_decoupled(model, flow, flow.times.front(), z, cfg.M,
                                        sim_config(cfg, splitmix64(cfg.seed ^ 0x4B53ull),
                                                   cfg.record_every));
    CsvTable ks({"t", "D", "p"});
    double pmin = 1.0;
    for (std::size_t j = 1; j <= ks_times; ++j) {
      const double target = cfg.T * static_cast<double>(j) / static_cast<double>(ks_times);
      std::size_t k = 0;
      for (std::size_t q = 0; q < tr.times.size(); ++q)
        if (std::abs(tr.times[q] - target) < std::abs(tr.times[k] - target)) k = q;
      std::vector<double> a(cfg.M), b(cfg.M);
      for (std::size_t m = 0; m < cfg.M; ++m) {
        a[m] = tr.leg2[k][m * d];
        b[m] = ref.states[k][m * d];
      }
      const auto r = ks_two_sample(a, b);
      ks.add_row({tr.times[k], r.D, r.p});
      pmin = std::min(pmin, r.p);
    }
    out.files.emplace_back("ks.csv", ks.str());
    const double adj = std::min(1.0, pmin * static_cast<double>(ks_times));
    out.report["ks_p_adjusted"] = adj;
    out.report["ks_pass"] = adj > ks_level;
  }
  return out;
}

// ------------------------------------------------------------------ chaos

namespace {

struct EtaTrack {
  double eta;
  std::vector<double> curve, curve_se;
  std::vector<CompensatedSum> plateau_acc;  // per block
  std::size_t plateau_n = 0;
};

// Draw `count` k-tuples from a cloud: without replacement when possible.
std::vector<double> cloud_tuples(const ParticleEnsemble& cloud, std::size_t count, std::size_t k,
                                 SequentialRng& rng, std::vector<char>& taken) {
  const int d = cloud.d;
  std::vector<double> out(count * k * d);
  const bool fresh = count * k * 2 <= cloud.N;
  for (std::size_t a = 0; a < count * k; ++a) {
    std::size_t j = rng.below(cloud.N);
    if (fresh)
      while (taken[j]) j = rng.below(cloud.N);
    taken[j] = 1;
    std::copy_n(cloud.particle(j), d, out.data() + a * d);
  }
  return out;
}

}  // namespace

ExperimentOutput chaos_experiment(const ExperimentConfig& cfg) {
  const ModelSpec model = load_model(cfg.model);
  const int d = model.d;
  const std::size_t k = cfg.k;
  ExperimentOutput out;

  std::vector<double> etas = {cfg.eta};
  if (cfg.kind == "poc-eta") {
    if (!(cfg.eta < 1.0)) throw LoadError("eta", "poc-eta needs eta < 1");
    etas = {cfg.eta, 0.99, 1.0};
  }
  etas = param(cfg, "etas", etas);
  for (double e : etas)
    if (!(e > 0.0 && e <= 1.0)) throw LoadError("params.etas", "entries must lie in (0, 1]");
  const bool all_one = std::all_of(etas.begin(), etas.end(), [](double e) { return e == 1.0; });
  const std::string mode_name =
      cfg.coupling == "auto" ? (all_one ? "synchronous" : "maximal_reflection") : cfg.coupling;
  const CouplingMode mode = parse_coupling_mode(mode_name);
  const double plateau_fraction = param(cfg, "plateau_fraction", 1.0 / 3.0);
  const double plateau_start = cfg.T * (1.0 - plateau_fraction);
  const auto transport_times = param<std::size_t>(cfg, "transport_times", 3);
  const auto bootstrap = param<std::size_t>(cfg, "bootstrap", 20);
  const auto slope_window = param<std::vector<double>>(cfg, "slope_window", {-0.7, -0.3});
  const double uniform_ratio = param(cfg, "uniform_ratio", 1.25);
  if (slope_window.size() != 2) throw LoadError("params.slope_window", "expected two numbers");

  // gate advisory
  try {
    const auto rep = check_theorem_hypotheses(model, model.profile, param(cfg, "cG", 1.0), d);
    out.report["gate_theorem"] = rep.gate_theorem;
    if (!rep.gate_theorem)
      out.warnings.push_back("theorem hypotheses not met for the assumed cG; running anyway");
  } catch (const Error& e) {
    out.warnings.push_back(std::string("hypothesis check failed: ") + e.what());
  }

  const InitSpec& limit = cfg.limit_init ? *cfg.limit_init : cfg.init;
  std::string warn;
  const auto flow = simulate_reference_flow(model, cfg.reference_size(), limit,
                                            sim_config(cfg, cfg.seed, 1), &warn, cfg.max_N());
  if (!warn.empty()) out.warnings.push_back(warn);

  const std::size_t steps = static_cast<std::size_t>(std::llround(cfg.T / cfg.dt));
  std::vector<double> rec_times = {0.0};
  for (std::size_t s = 1; s <= steps; ++s)
    if (s % cfg.record_every == 0 || s == steps) rec_times.push_back(static_cast<double>(s) * cfg.dt);
  std::set<std::size_t> tr_idx = {0};
  {
    std::vector<std::size_t> plateau;
    for (std::size_t i = 0; i < rec_times.size(); ++i)
      if (rec_times[i] >= plateau_start - 1e-12) plateau.push_back(i);
    for (std::size_t j = 0; j < transport_times && !plateau.empty(); ++j) {
      const std::size_t pos =
          transport_times == 1 ? plateau.size() - 1
                               : j * (plateau.size() - 1) / (transport_times - 1);
      tr_idx.insert(plateau[pos]);
    }
  }

  CsvTable curve_tab({"N", "t", "eta", "w", "stderr"});
  CsvTable transport_tab({"N", "t", "eta", "w_assign", "w_assign_se", "baseline", "baseline_se"});
  CsvTable plateau_tab({"N", "eta", "plateau", "stderr", "w_assign_plateau"});
  std::vector<std::vector<double>> plateaus(etas.size()), plateau_se(etas.size());
  std::vector<std::vector<double>> assign_plateaus(etas.size());
  json per_N = json::array();
  std::vector<double> Ns;

  for (std::size_t N : cfg.N) {
    const std::size_t R = (cfg.M + N - 1) / N;
    const std::size_t nb = N / k;
    const std::size_t blocks = R * nb;
    const std::uint64_t seedN = splitmix64(cfg.seed ^ (0x9E3779B97F4A7C15ull * N));
    const auto init = sample_init_block(cfg.init, R, N, d, seedN);
    const auto twin = cfg.limit_init ? sample_init_block(*cfg.limit_init, R, N, d, splitmix64(seedN + 1))
                                     : init;
    std::vector<EtaTrack> tracks;
    for (double e : etas) tracks.push_back({e, {}, {}, std::vector<CompensatedSum>(blocks), 0});
    std::vector<std::vector<double>> assign_vals(etas.size());

    auto visit = [&](std::size_t rec, double t, std::span<const double> x,
                     std::span<const double> xb) {
      const bool in_plateau = t >= plateau_start - 1e-12;
      std::vector<double> cost(blocks);
      for (auto& tk : tracks) {
        for (std::size_t r = 0; r < R; ++r)
          for (std::size_t b = 0; b < nb; ++b) {
            double c = 0.0;
            for (std::size_t i = b * k; i < (b + 1) * k; ++i) {
              const std::size_t row = r * N + i;
              const double dd = std::sqrt(dist2(x.data() + row * d, xb.data() + row * d, d));
              c += tk.eta == 1.0 ? dd : std::pow(dd, tk.eta);
            }
            cost[r * nb + b] = c;
          }
        const auto ms = mean_se(cost);
        tk.curve.push_back(ms.mean);
        tk.curve_se.push_back(ms.se);
        if (in_plateau) {
          for (std::size_t b = 0; b < blocks; ++b) tk.plateau_acc[b].add(cost[b]);
          ++tk.plateau_n;
        }
      }
      if (!tr_idx.count(rec)) return;
      // independent-sample transport estimate against the reference cloud
      std::vector<double> samples(blocks * k * d);
      for (std::size_t r = 0; r < R; ++r)
        for (std::size_t b = 0; b < nb; ++b)
          std::copy_n(x.data() + (r * N + b * k) * d, k * d,
                      samples.data() + (r * nb + b) * k * d);
      const auto& cloud = flow.at(t);
      SequentialRng rng(NoiseSource(seedN, purpose::bootstrap).split(rec), 0, 7);
      std::vector<char> taken(cloud.N, 0);
      const auto lim_a = cloud_tuples(cloud, blocks, k, rng, taken);
      const auto lim_b = cloud_tuples(cloud, blocks, k, rng, taken);
      TransportOptions topt;
      topt.bootstrap = bootstrap;
      topt.subsample = true;
      topt.seed = seedN ^ rec;
      for (std::size_t e = 0; e < etas.size(); ++e) {
        const auto w = wasserstein_assignment(samples, blocks, lim_a, blocks, k, d, etas[e], topt);
        const auto base = wasserstein_assignment(lim_b, blocks, lim_a, blocks, k, d, etas[e], topt);
        transport_tab.add_row({static_cast<long long>(N), t, etas[e], w.value, w.stderr,
                               base.value, base.stderr});
        if (in_plateau) assign_vals[e].push_back(w.value);
      }
    };
    simulate_chaos_coupling(model, flow, init, twin, R, N,
                            sim_config(cfg, seedN, cfg.record_every), mode, visit);

    json nj;
    nj["N"] = N;
    nj["replicas"] = R;
    nj["blocks"] = blocks;
    for (std::size_t e = 0; e < etas.size(); ++e) {
      auto& tk = tracks[e];
      for (std::size_t i = 0; i < tk.curve.size(); ++i)
        curve_tab.add_row({static_cast<long long>(N), rec_times[i], tk.eta, tk.curve[i], tk.curve_se[i]});
      std::vector<double> avg(blocks);
      for (std::size_t b = 0; b < blocks; ++b)
        avg[b] = tk.plateau_acc[b].value() / static_cast<double>(std::max<std::size_t>(1, tk.plateau_n));
      const auto ms = mean_se(avg);
      const double ap = assign_vals[e].empty() ? 0.0 : compensated_mean(assign_vals[e]);
      plateaus[e].push_back(ms.mean);
      plateau_se[e].push_back(ms.se);
      assign_plateaus[e].push_back(ap);
      plateau_tab.add_row({static_cast<long long>(N), tk.eta, ms.mean, ms.se, ap});

      // no-growth check over the second half
      std::vector<double> late;
      for (std::size_t i = 0; i < tk.curve.size(); ++i)
        if (rec_times[i] >= 0.5 * cfg.T - 1e-12) late.push_back(tk.curve[i]);
      const double med = median(late);
      const double mx = *std::max_element(late.begin(), late.end());
      json ej = {{"eta", tk.eta}, {"plateau", ms.mean}, {"stderr", ms.se},
                 {"w_assign_plateau", ap}, {"late_max", mx}, {"late_median", med},
                 {"late_ratio", med > 0.0 ? mx / med : 0.0}};

      // short-time envelope a + c min{t^{(eta-1)/2} W1(0), W_eta(0)} fitted at two anchors
      if (cfg.kind == "poc-eta" && tk.eta < 1.0) {
        const auto one = std::find(etas.begin(), etas.end(), 1.0) - etas.begin();
        const double w1_0 = tracks[one].curve[0], we_0 = tk.curve[0];
        auto m = [&](double t) {
          return std::min(std::pow(t, 0.5 * (tk.eta - 1.0)) * w1_0, we_0);
        };
        const auto anchors = param<std::vector<double>>(cfg, "envelope_anchors", {0.25, 1.0});
        auto nearest = [&](double target) {
          std::size_t best = 1;
          for (std::size_t i = 1; i < rec_times.size(); ++i)
            if (std::abs(rec_times[i] - target) < std::abs(rec_times[best] - target)) best = i;
          return best;
        };
        if (anchors.size() == 2 && rec_times.size() > 2) {
          const std::size_t ia = nearest(anchors[0]), ib = nearest(anchors[1]);
          const double ma = m(rec_times[ia]), mb = m(rec_times[ib]);
          double a, c;
          if (std::abs(ma - mb) > 1e-14 * (1.0 + std::abs(ma))) {
            c = std::max(0.0, (tk.curve[ia] - tk.curve[ib]) / (ma - mb));
            a = std::max(tk.curve[ia] - c * ma, tk.curve[ib] - c * mb);
          } else {
            c = 0.0;
            a = std::max(tk.curve[ia], tk.curve[ib]);
          }
          double worst = 0.0;
          bool ok = true;
          for (std::size_t i = 1; i < rec_times.size() && rec_times[i] <= 1.0 + 1e-12; ++i) {
            const double env = a + c * m(rec_times[i]);
            const double excess = tk.curve[i] - env - 3.0 * tk.curve_se[i];
            worst = std::max(worst, excess);
            ok = ok && excess <= 0.0;
          }
          ej["envelope"] = {{"a", a}, {"c", c}, {"max_excess", worst}, {"pass", ok}};
        }
      }
      nj["eta"].push_back(ej);
    }
    per_N.push_back(nj);
    Ns.push_back(static_cast<double>(N));
  }
  out.files.emplace_back("curves.csv", curve_tab.str());
  out.files.emplace_back("transport.csv", transport_tab.str());
  out.files.emplace_back("plateau.csv", plateau_tab.str());

  out.report["coupling"] = mode_name;
  out.report["N_ref"] = cfg.reference_size();
  out.report["per_N"] = per_N;
  json fits = json::array();
  bool slope_ok = true;
  for (std::size_t e = 0; e < etas.size(); ++e) {
    json fj = {{"eta", etas[e]}};
    const bool positive = std::all_of(plateaus[e].begin(), plateaus[e].end(),
                                      [](double v) { return v > 0.0; });
    if (Ns.size() >= 3 && positive) {
      const auto fit = fit_rate(Ns, plateaus[e], FitScale::loglog);
      fj["fit"] = fit_json(fit);
      fj["slope_pass"] = fit.slope >= slope_window[0] && fit.slope <= slope_window[1];
      if (e == 0) slope_ok = fj["slope_pass"];
    } else {
      fj["fit"] = nullptr;
      fj["slope_pass"] = false;
      if (e == 0) slope_ok = false;
    }
    fits.push_back(fj);
  }
  out.report["fits"] = fits;
  out.report["slope_pass"] = slope_ok;

  if (cfg.kind == "uniform-time") {
    bool ok = true;
    for (const auto& nj : per_N) ok = ok && nj["eta"][0]["late_ratio"].get<double>() <= uniform_ratio;
    out.report["uniform_pass"] = ok;
  }
  if (cfg.kind == "poc-eta") {
    const auto i99 = std::find(etas.begin(), etas.end(), 0.99) - etas.begin();
    const auto i1 = std::find(etas.begin(), etas.end(), 1.0) - etas.begin();
    if (i99 < static_cast<long>(etas.size()) && i1 < static_cast<long>(etas.size())) {
      json cj = json::array();
      bool ok = true;
      for (std::size_t j = 0; j < Ns.size(); ++j) {
        const double diff = std::abs(plateaus[i99][j] - plateaus[i1][j]);
        const double z = plateau_se[i1][j] > 0.0 ? diff / plateau_se[i1][j] : 0.0;
        cj.push_back({{"N", Ns[j]}, {"diff", diff}, {"stderr_units", z}});
        ok = ok && diff <= 3.0 * plateau_se[i1][j];
      }
      out.report["continuity"] = cj;
      out.report["continuity_pass"] = ok;
    }
  }
  return out;
}

// -------------------------------------------------------------------- lln

ExperimentOutput lln_experiment(const ExperimentConfig& cfg) {
  const std::string problem = param<std::string>(cfg, "problem", "uniform_mean");
  LlnProblem p;
  if (problem == "uniform_mean")
    p = lln_uniform_mean();
  else if (problem == "constant")
    p = lln_constant(param(cfg, "constant", 1.0));
  else
    throw LoadError("params.problem", "unknown problem '" + problem + "'");
  const auto Ns = param<std::vector<std::size_t>>(
      cfg, "Ns", {16, 32, 64, 100, 128, 256, 512, 1024, 2048, 4096});
  const auto rows = lln_gap(p, Ns, cfg.M, cfg.seed);
  ExperimentOutput out;
  CsvTable tab({"N", "gap", "stderr", "oracle"});
  std::vector<double> x, y;
  json checks = json::array();
  for (const auto& r : rows) {
    const double oracle = problem == "uniform_mean"
                              ? std::sqrt(1.0 / 12.0) * std::sqrt(2.0 / (std::numbers::pi * static_cast<double>(r.N)))
                              : 0.0;
    tab.add_row({static_cast<long long>(r.N), r.gap, r.stderr, oracle});
    if (r.gap > 0.0) {
      x.push_back(static_cast<double>(r.N));
      y.push_back(r.gap);
    }
    if (problem == "uniform_mean")
      checks.push_back({{"N", r.N}, {"gap", r.gap}, {"oracle", oracle},
                        {"within_3se", std::abs(r.gap - oracle) <= 3.0 * r.stderr}});
  }
  out.files.emplace_back("lln.csv", tab.str());
  out.report["problem"] = problem;
  out.report["checks"] = checks;
  if (x.size() >= 3) {
    const auto fit = fit_rate(x, y, FitScale::loglog);
    out.report["fit"] = fit_json(fit);
    out.report["slope_pass"] = fit.slope >= -0.6 && fit.slope <= -0.4;
  }
  return out;
}

// --------------------------------------------------------------- gronwall

ExperimentOutput gronwall_experiment(const ExperimentConfig& cfg) {
  GronwallInput in;
  in.theta = param(cfg, "theta", 1.0);
  in.C = param(cfg, "C", 1.0);
  in.T = param(cfg, "T", cfg.T);
  in.tol = param(cfg, "tol", 1e-15);
  const auto grid = param<std::size_t>(cfg, "grid", 200);
  if (grid < 1) throw LoadError("params.grid", "must be >= 1");
  bool constant = true;
  double a0 = 1.0;
  if (cfg.params.contains("a") && cfg.params.at("a").is_array()) {
    in.a = param<std::vector<double>>(cfg, "a", {});
    constant = false;
  } else {
    a0 = param(cfg, "a", 1.0);
    in.a.assign(grid + 1, a0);
  }
  const auto res = gronwall_bound(in);
  ExperimentOutput out;
  const bool classical = constant && in.theta == 1.0;
  CsvTable tab({"t", "a", "bound", "classical"});
  double worst = 0.0;
  for (std::size_t i = 0; i < res.t.size(); ++i) {
    const double cl = classical ? a0 * std::exp(in.C * res.t[i]) : 0.0;
    if (classical && cl > 0.0) worst = std::max(worst, std::abs(res.bound[i] - cl) / cl);
    tab.add_row({res.t[i], in.a[i], res.bound[i], cl});
  }
  out.files.emplace_back("gronwall.csv", tab.str());
  out.report["terms"] = res.terms;
  out.report["converged"] = res.converged;
  if (classical) out.report["max_rel_error_vs_exponential"] = worst;
  return out;
}

// ---------------------------------------------------------------- duhamel

ExperimentOutput duhamel_experiment(const ExperimentConfig& cfg) {
  const json pair = cfg.params.value("pair", json{{"kind", "heat"}, {"beta1", 1.0}, {"beta2", 0.5}});
  const std::string kind = pair.value("kind", std::string("heat"));
  const int d = pair.value("d", 1);
  DiffusionSpec m1, m2;
  double b1 = 0.0, b2 = 0.0;
  if (kind == "heat") {
    b1 = pair.value("beta1", 1.0);
    b2 = pair.value("beta2", 0.5);
    m1 = constant_diffusion(d, b1);
    m2 = constant_diffusion(d, b2);
  } else if (kind == "identical") {
    m1 = m2 = linear_diffusion(d, pair.value("a", 1.0), pair.value("beta", 1.0));
  } else if (kind == "linear") {
    m1 = linear_diffusion(d, pair.value("a1", 1.0), pair.value("beta", 0.0));
    m2 = linear_diffusion(d, pair.value("a2", 0.5), pair.value("beta", 0.0));
  } else {
    throw LoadError("params.pair.kind", "unknown pair '" + kind + "'");
  }
  const double width = param(cfg, "width", 1.0);
  const double t = param(cfg, "t", 1.0);
  const auto zs = param<std::vector<double>>(cfg, "z", {-1.0, 0.0, 0.5});
  std::vector<std::vector<double>> grid;
  for (double z : zs) grid.push_back(std::vector<double>(d, z));
  DuhamelOptions opt;
  opt.outer = param<std::size_t>(cfg, "outer", cfg.M);
  opt.inner = param<std::size_t>(cfg, "inner", 200);
  opt.s_nodes = param<std::size_t>(cfg, "s_nodes", 8);
  opt.h = param(cfg, "h", 2e-2);
  opt.dt = cfg.dt;
  opt.seed = cfg.seed;
  const auto res = duhamel_residual(m1, m2, gaussian_bump(width, d), t, grid, opt);

  ExperimentOutput out;
  if (!res.warning.empty()) out.warnings.push_back(res.warning);
  CsvTable tab({"z", "lhs", "lhs_se", "rhs", "rhs_se", "residual", "error", "oracle"});
  bool ok = true, oracle_ok = true;
  for (const auto& p : res.points) {
    double oracle = 0.0;
    if (kind == "heat") {
      oracle = heat_gaussian_bump(width, b1, t, p.z) - heat_gaussian_bump(width, b2, t, p.z);
      oracle_ok = oracle_ok && std::abs(p.rhs - oracle) <= 3.0 * p.rhs_se;
    }
    ok = ok && p.residual <= 3.0 * p.error;
    tab.add_row({p.z[0], p.lhs, p.lhs_se, p.rhs, p.rhs_se, p.residual, p.error, oracle});
  }
  out.files.emplace_back("duhamel.csv", tab.str());
  out.report["pair"] = kind;
  out.report["max_residual"] = res.max_residual;
  out.report["error_at_max"] = res.error_at_max;
  out.report["residual_pass"] = ok;
  if (kind == "heat") out.report["oracle_pass"] = oracle_ok;
  return out;
}

// ---------------------------------------------------------------- moments

ExperimentOutput moments_experiment(const ExperimentConfig& cfg) {
  const ModelSpec model = load_model(cfg.model);
  const std::size_t N = cfg.N.front();
  const std::size_t R = std::max<std::size_t>(1, cfg.M / N);
  const auto init = sample_init_block(cfg.init, R, N, model.d, cfg.seed);
  const auto traj = simulate_particle_system(model, init, R, N, sim_config(cfg, cfg.seed, cfg.record_every));
  const auto curve = second_moment_curve(traj);
  ExperimentOutput out;
  CsvTable tab({"t", "second_moment", "stderr"});
  double max_all = 0.0, max_half = 0.0;
  for (std::size_t i = 0; i < curve.t.size(); ++i) {
    tab.add_row({curve.t[i], curve.mean[i], curve.stderr[i]});
    max_all = std::max(max_all, curve.mean[i]);
    if (curve.t[i] <= 0.5 * cfg.T + 1e-12) max_half = std::max(max_half, curve.mean[i]);
  }
  out.files.emplace_back("moments.csv", tab.str());
  const double lhs = model.constants.Kb + model.constants.Ksigma;
  out.report["gate_moment"] = lhs < 0.5 * model.constants.K2;
  if (!(lhs < 0.5 * model.constants.K2)) out.warnings.push_back("Kb + Ksigma >= K2 / 2");
  out.report["max_full"] = max_all;
  out.report["max_first_half"] = max_half;
  out.report["ratio"] = max_half > 0.0 ? max_all / max_half : 0.0;
  out.report["bounded_pass"] = max_all <= param(cfg, "moment_factor", 1.1) * max_half;
  return out;
}

// --------------------------------------------------------------- simulate

ExperimentOutput simulate_experiment(const ExperimentConfig& cfg) {
  const ModelSpec model = load_model(cfg.model);
  const std::size_t N = cfg.N.front();
  const std::size_t R = param<std::size_t>(cfg, "replicas", 1);
  const auto init = sample_init_block(cfg.init, R, N, model.d, cfg.seed);
  const auto traj = simulate_particle_system(model, init, R, N, sim_config(cfg, cfg.seed, cfg.record_every));
  ExperimentOutput out;
  std::vector<std::string> header = {"t", "replica", "particle"};
  for (int c = 0; c < model.d; ++c) header.push_back("x" + std::to_string(c));
  CsvTable tab(header);
  for (std::size_t k = 0; k < traj.times.size(); ++k)
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t i = 0; i < N; ++i) {
        std::vector<CsvTable::Cell> row = {traj.times[k], static_cast<long long>(r),
                                           static_cast<long long>(i)};
        const double* p = traj.at(k, r, i);
        for (int c = 0; c < model.d; ++c) row.emplace_back(p[c]);
        tab.add_row(std::move(row));
      }
  out.files.emplace_back("trajectory.csv", tab.str());
  const auto curve = second_moment_curve(traj);
  CsvTable mt({"t", "second_moment", "stderr"});
  for (std::size_t i = 0; i < curve.t.size(); ++i) mt.add_row({curve.t[i], curve.mean[i], curve.stderr[i]});
  out.files.emplace_back("moments.csv", mt.str());
  out.report["N"] = N;
  out.report["replicas"] = R;
  out.report["records"] = traj.times.size();
  return out;
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto& k = cfg.kind;
  ExperimentOutput out;
  if (k == "constants") out = constants_experiment(cfg);
  else if (k == "couple") out = coupling_experiment(cfg);
  else if (k == "poc" || k == "poc-eta" || k == "uniform-time") out = chaos_experiment(cfg);
  else if (k == "lln") out = lln_experiment(cfg);
  else if (k == "gronwall") out = gronwall_experiment(cfg);
  else if (k == "duhamel") out = duhamel_experiment(cfg);
  else if (k == "moments") out = moments_experiment(cfg);
  else if (k == "simulate") out = simulate_experiment(cfg);
  else throw LoadError("kind", "unknown experiment kind '" + k + "'");
  out.report["kind"] = k;
  out.report["warnings"] = out.warnings;
  return out;
}

}  // namespace chaoskit
