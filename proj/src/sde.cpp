#include "chaoskit/sde.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "chaoskit/error.hpp"

namespace chaoskit {

std::size_t SimConfig::steps() const { return static_cast<std::size_t>(std::llround(T / dt)); }

void SimConfig::validate() const {
  if (!(dt > 0.0)) throw DomainError("sim: dt must be > 0");
  if (!(T >= 0.0)) throw DomainError("sim: T must be >= 0");
  if (M < 1) throw DomainError("sim: M must be >= 1");
  if (record_every < 1) throw DomainError("sim: record_every must be >= 1");
  if (std::abs(steps() * dt - T) > 1e-9 * std::max(1.0, T))
    throw DomainError("sim: T must be a multiple of dt");
}

InitSpec::Kind parse_init_kind(const std::string& name) {
  if (name == "point") return InitSpec::Kind::point;
  if (name == "gaussian") return InitSpec::Kind::gaussian;
  if (name == "uniform_box") return InitSpec::Kind::uniform_box;
  if (name == "mixture") return InitSpec::Kind::mixture;
  throw DomainError("init: unknown kind '" + name + "'");
}

void InitSpec::validate(int d) const {
  if (!center.empty() && center.size() != static_cast<std::size_t>(d))
    throw DomainError("init: center must have d entries");
  if (kind == Kind::gaussian || kind == Kind::uniform_box)
    if (!(scale >= 0.0)) throw DomainError("init: scale must be >= 0");
  if (kind == Kind::mixture) {
    if (components.empty()) throw DomainError("init: mixture needs components");
    double w = 0.0;
    for (const auto& c : components) {
      if (!(c.weight >= 0.0)) throw DomainError("init: mixture weights must be >= 0");
      if (c.mean.size() != static_cast<std::size_t>(d))
        throw DomainError("init: mixture means must have d entries");
      if (!(c.std >= 0.0)) throw DomainError("init: mixture std must be >= 0");
      w += c.weight;
    }
    if (!(w > 0.0)) throw DomainError("init: mixture weights sum to zero");
  }
}

namespace {

void fill_replica(const InitSpec& spec, const NoiseSource& src, std::uint32_t replica,
                  std::size_t N, int d, double* out) {
  std::vector<double> z(d);
  auto centre = [&](int k) { return spec.center.empty() ? 0.0 : spec.center[k]; };
  std::size_t comp = 0;
  if (spec.kind == InitSpec::Kind::mixture) {
    double total = 0.0;
    for (const auto& c : spec.components) total += c.weight;
    const double u = src.uniform(Channel::Init, replica, 0xFFFFFFFFu, 1) * total;
    double acc = 0.0;
    comp = spec.components.size() - 1;
    for (std::size_t c = 0; c < spec.components.size(); ++c) {
      acc += spec.components[c].weight;
      if (u < acc) {
        comp = c;
        break;
      }
    }
  }
  for (std::size_t i = 0; i < N; ++i) {
    double* p = out + i * d;
    const auto pi = static_cast<std::uint32_t>(i);
    switch (spec.kind) {
      case InitSpec::Kind::point:
        for (int k = 0; k < d; ++k) p[k] = centre(k);
        break;
      case InitSpec::Kind::gaussian:
        src.normals(Channel::Init, replica, pi, 0, z);
        for (int k = 0; k < d; ++k) p[k] = centre(k) + spec.scale * z[k];
        break;
      case InitSpec::Kind::uniform_box:
        src.uniforms(Channel::Init, replica, pi, 0, z);
        for (int k = 0; k < d; ++k) p[k] = centre(k) + spec.scale * (2.0 * z[k] - 1.0);
        break;
      case InitSpec::Kind::mixture: {
        const auto& c = spec.components[comp];
        src.normals(Channel::Init, replica, pi, 0, z);
        for (int k = 0; k < d; ++k) p[k] = c.mean[k] + c.std * z[k];
        break;
      }
    }
  }
}

// x += drift dt + sqrt(beta) dW + diffusion dB for every row.
void em_update(const ModelSpec& model, std::span<double> x, std::span<const double> drift,
               std::span<const double> diff, std::span<const double> dW,
               std::span<const double> dB, std::size_t rows, double dt) {
  const int d = model.d, n = model.n;
  const double sb = std::sqrt(model.beta);
#pragma omp parallel for schedule(static)
  for (std::size_t row = 0; row < rows; ++row) {
    double* xr = x.data() + row * d;
    const double* s = diff.data() + row * d * n;
    const double* b = dB.data() + row * n;
    for (int k = 0; k < d; ++k) {
      double v = xr[k] + drift[row * d + k] * dt + sb * dW[row * d + k];
      for (int l = 0; l < n; ++l) v += s[k * n + l] * b[l];
      xr[k] = v;
    }
  }
}

void check_state(std::span<const double> x, std::size_t step) {
  for (double v : x)
    if (!std::isfinite(v))
      throw NumericError("simulation blew up at step " + std::to_string(step), step);
}

}  // namespace

ParticleEnsemble sample_exchangeable_init(const InitSpec& spec, std::size_t N, int d,
                                          std::uint64_t seed, std::uint32_t replica) {
  if (N < 1) throw DomainError("init: N must be >= 1");
  spec.validate(d);
  ParticleEnsemble e;
  e.N = N;
  e.d = d;
  e.states.resize(N * d);
  fill_replica(spec, NoiseSource(seed, purpose::init), replica, N, d, e.states.data());
  return e;
}

std::vector<double> sample_init_block(const InitSpec& spec, std::size_t R, std::size_t N, int d,
                                      std::uint64_t seed) {
  if (N < 1 || R < 1) throw DomainError("init: R and N must be >= 1");
  spec.validate(d);
  std::vector<double> out(R * N * d);
  const NoiseSource src(seed, purpose::init);
#pragma omp parallel for schedule(static)
  for (std::size_t r = 0; r < R; ++r)
    fill_replica(spec, src, static_cast<std::uint32_t>(r), N, d, out.data() + r * N * d);
  return out;
}

ParticleEnsemble step_particle_system(const ModelSpec& model, const ParticleEnsemble& ensemble,
                                      double dt, std::span<const double> dW,
                                      std::span<const double> dB, Exec exec,
                                      std::size_t step_index) {
  ensemble.validate();
  const std::size_t N = ensemble.N;
  if (ensemble.d != model.d) throw DomainError("step: ensemble dimension does not match model");
  if (dW.size() != N * model.d || dB.size() != N * model.n)
    throw DomainError("step: noise increments have the wrong shape");
  std::vector<std::uint32_t> order(N);
  canonical_order(ensemble.states, N, model.d, order.data());
  std::vector<double> drift(N * model.d), diff(N * model.d * model.n);
  system_fields(model, ensemble.states, 1, N, order, drift, diff, exec);
  ParticleEnsemble out = ensemble;
  out.time = ensemble.time + dt;
  em_update(model, out.states, drift, diff, dW, dB, N, dt);
  check_state(out.states, step_index);
  return out;
}

Trajectory simulate_particle_system(const ModelSpec& model, std::span<const double> init,
                                    std::size_t R, std::size_t N, const SimConfig& cfg,
                                    std::span<const std::uint32_t> stream_ids,
                                    std::uint64_t purpose_tag) {
  cfg.validate();
  const int d = model.d, n = model.n;
  if (init.size() != R * N * d) throw DomainError("simulate: init has the wrong size");
  if (!stream_ids.empty() && stream_ids.size() != N)
    throw DomainError("simulate: stream_ids must have N entries");
  const std::size_t rows = R * N;
  const std::size_t steps = cfg.steps();
  const NoiseSource src(cfg.seed, purpose_tag);
  const double sdt = std::sqrt(cfg.dt);

  std::vector<double> x(init.begin(), init.end());
  check_state(x, 0);
  std::vector<std::uint32_t> order(rows);
  std::vector<double> drift(rows * d), diff(rows * d * n), dW(rows * d), dB(rows * n);

  Trajectory tr;
  tr.R = R;
  tr.N = N;
  tr.d = d;
  tr.times.push_back(0.0);
  tr.states.push_back(x);

  for (std::size_t k = 0; k < steps; ++k) {
#pragma omp parallel for schedule(static)
    for (std::size_t r = 0; r < R; ++r)
      canonical_order({x.data() + r * N * d, N * d}, N, d, order.data() + r * N);
    system_fields(model, x, R, N, order, drift, diff, cfg.exec);
#pragma omp parallel for schedule(static)
    for (std::size_t row = 0; row < rows; ++row) {
      const auto r = static_cast<std::uint32_t>(row / N);
      const std::size_t i = row % N;
      const std::uint32_t sid = stream_ids.empty() ? static_cast<std::uint32_t>(i) : stream_ids[i];
      src.normals(Channel::W, r, sid, k, {dW.data() + row * d, static_cast<std::size_t>(d)});
      src.normals(Channel::B, r, sid, k, {dB.data() + row * n, static_cast<std::size_t>(n)});
      for (int c = 0; c < d; ++c) dW[row * d + c] *= sdt;
      for (int c = 0; c < n; ++c) dB[row * n + c] *= sdt;
    }
    em_update(model, x, drift, diff, dW, dB, rows, cfg.dt);
    check_state(x, k + 1);
    if ((k + 1) % cfg.record_every == 0 || k + 1 == steps) {
      tr.times.push_back(static_cast<double>(k + 1) * cfg.dt);
      tr.states.push_back(x);
    }
  }
  return tr;
}

MeasureFlow simulate_reference_flow(const ModelSpec& model, std::size_t N_ref,
                                    const InitSpec& init, const SimConfig& cfg,
                                    std::string* warning, std::size_t largest_N) {
  if (N_ref < 1) throw DomainError("reference flow: N_ref must be >= 1");
  if (warning) {
    warning->clear();
    if (largest_N > 0 && N_ref < 8 * largest_N)
      *warning = "N_ref = " + std::to_string(N_ref) + " is below 8x the largest N (" +
                 std::to_string(largest_N) + "); the reference bias may dominate";
  }
  const auto x0 = sample_init_block(init, 1, N_ref, model.d, cfg.seed ^ 0x5EF5EF5EFull);
  const auto tr = simulate_particle_system(model, x0, 1, N_ref, cfg, {}, purpose::reference_flow);
  MeasureFlow flow;
  std::vector<std::uint32_t> order(N_ref);
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    ParticleEnsemble e;
    e.time = tr.times[k];
    e.N = N_ref;
    e.d = model.d;
    e.states.resize(N_ref * model.d);
    canonical_order(tr.states[k], N_ref, model.d, order.data());
    for (std::size_t j = 0; j < N_ref; ++j)
      std::copy_n(tr.states[k].data() + static_cast<std::size_t>(order[j]) * model.d, model.d,
                  e.states.data() + j * model.d);
    flow.times.push_back(e.time);
    flow.clouds.push_back(std::move(e));
  }
  return flow;
}

Trajectory simulate_decoupled(const ModelSpec& model, const MeasureFlow& flow, double s,
                              std::span<const double> z, std::size_t P, const SimConfig& cfg,
                              std::uint64_t purpose_tag) {
  cfg.validate();
  flow.validate();
  const int d = model.d, n = model.n;
  if (z.size() != P * d) throw DomainError("decoupled: start points have the wrong size");
  if (s < flow.times.front() - 1e-12 || s > flow.times.back() + 1e-12)
    throw DomainError("decoupled: start time outside the flow grid");
  const std::size_t steps = cfg.steps();
  const NoiseSource src(cfg.seed, purpose_tag);
  const double sdt = std::sqrt(cfg.dt);

  std::vector<double> x(z.begin(), z.end());
  std::vector<double> drift(P * d), diff(P * d * n), dW(P * d), dB(P * n);
  Trajectory tr;
  tr.R = 1;
  tr.N = P;
  tr.d = d;
  tr.times.push_back(s);
  tr.states.push_back(x);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = s + static_cast<double>(k) * cfg.dt;
    const auto& cloud = flow.at(t);
    flow_fields(model, x, P, cloud.states, cloud.N, drift, diff, cfg.exec);
#pragma omp parallel for schedule(static)
    for (std::size_t p = 0; p < P; ++p) {
      src.normals(Channel::W, 0, static_cast<std::uint32_t>(p), k, {dW.data() + p * d, static_cast<std::size_t>(d)});
      src.normals(Channel::B, 0, static_cast<std::uint32_t>(p), k, {dB.data() + p * n, static_cast<std::size_t>(n)});
      for (int c = 0; c < d; ++c) dW[p * d + c] *= sdt;
      for (int c = 0; c < n; ++c) dB[p * n + c] *= sdt;
    }
    em_update(model, x, drift, diff, dW, dB, P, cfg.dt);
    check_state(x, k + 1);
    if ((k + 1) % cfg.record_every == 0 || k + 1 == steps) {
      tr.times.push_back(s + static_cast<double>(k + 1) * cfg.dt);
      tr.states.push_back(x);
    }
  }
  return tr;
}

}  // namespace chaoskit
