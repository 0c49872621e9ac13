#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "chaoskit/ensemble.hpp"
#include "chaoskit/error.hpp"
#include "chaoskit/gradient.hpp"
#include "chaoskit/kernels.hpp"
#include "chaoskit/model.hpp"
#include "chaoskit/numeric.hpp"
#include "chaoskit/rng.hpp"
#include "chaoskit/sde.hpp"
#include "chaoskit/stats.hpp"

using namespace chaoskit;

namespace {

ModelSpec ou(double a = 1.0, double beta = 1.0) {
  LinearParams p;
  p.a = a;
  p.beta = beta;
  return make_linear_model(p);
}

ModelSpec brownian(double beta = 1.0) {
  ModelSpec m;
  m.beta = beta;
  m.b0 = [](const double*, double* out) { out[0] = 0.0; };
  return m;
}

ModelSpec interacting() {
  LinearParams p;
  p.kappa = 0.3;
  p.sigma_scale = 0.4;
  return make_linear_model(p);
}

MeasureFlow single_cloud(std::vector<double> pts) {
  MeasureFlow f;
  f.times = {0.0};
  ParticleEnsemble e;
  e.N = pts.size();
  e.states = std::move(pts);
  f.clouds = {e};
  return f;
}

// mean and standard error of x^2 over a block
MeanSE square_stats(std::span<const double> v) {
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = v[i] * v[i];
  return mean_se(sq);
}

}  // namespace

// ------------------------------------------------------------ init

TEST_CASE("point-mass init and iid init") {
  InitSpec s;
  s.kind = InitSpec::Kind::point;
  s.center = {2.5};
  const auto e = sample_exchangeable_init(s, 3, 1, 1);
  CHECK(e.states == std::vector<double>{2.5, 2.5, 2.5});
  s.kind = InitSpec::Kind::gaussian;
  s.center = {};
  const auto a = sample_exchangeable_init(s, 1000, 1, 7);
  const auto b = sample_exchangeable_init(s, 1000, 1, 7);
  CHECK(a.states == b.states);
  const auto ms = square_stats(a.states);
  CHECK(std::abs(ms.mean - 1.0) < 4.0 * ms.se);
}

TEST_CASE("mixture init is exchangeable but correlated across particles") {
  InitSpec s;
  s.kind = InitSpec::Kind::mixture;
  s.components = {{0.5, {-1.0}, 0.5}, {0.5, {1.0}, 0.5}};
  const std::size_t R = 100000;
  const auto x = sample_init_block(s, R, 2, 1, 3);
  // closed form: Cov(X^1, X^2) = Var(component mean) = 1
  std::vector<double> prod(R);
  double mean = 0.0;
  for (std::size_t r = 0; r < R; ++r) {
    prod[r] = x[2 * r] * x[2 * r + 1];
    mean += x[2 * r] + x[2 * r + 1];
  }
  mean /= 2.0 * R;
  const auto ms = mean_se(prod);
  CHECK(std::abs(ms.mean - mean * mean - 1.0) < 4.0 * ms.se);
  CHECK(ms.mean > 0.5);
}

TEST_CASE("unknown init kinds are rejected") {
  CHECK_THROWS_AS(parse_init_kind("cauchy"), DomainError);
}

// ------------------------------------------------------------ step

TEST_CASE("a step with zero noise is plain Euler") {
  const auto m = ou();
  ParticleEnsemble e;
  e.N = 2;
  e.states = {1.0, -2.0};
  const std::vector<double> zero(2, 0.0);
  const auto n = step_particle_system(m, e, 0.1, zero, zero);
  CHECK(n.states[0] == doctest::Approx(0.9));
  CHECK(n.states[1] == doctest::Approx(-1.8));
  CHECK(n.time == doctest::Approx(0.1));

  auto z = brownian();
  const auto same = step_particle_system(z, e, 0.1, zero, zero);
  CHECK(same.states == e.states);
}

TEST_CASE("a non-finite state reports the step") {
  ModelSpec m = brownian();
  m.b0 = [](const double* x, double* out) { out[0] = x[0] * x[0] * 1e200; };
  ParticleEnsemble e;
  e.N = 1;
  e.states = {1e200};
  const std::vector<double> zero(1, 0.0);
  CHECK_THROWS_AS(step_particle_system(m, e, 0.1, zero, zero, Exec::serial, 17), NumericError);
}

TEST_CASE("OU variance at T=5 matches the closed form") {
  const auto m = ou();
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.T = 5.0;
  cfg.seed = 21;
  cfg.record_every = 5000;
  const std::size_t R = 100, N = 1000;  // N M = 1e5 samples
  const std::vector<double> init(R * N, 0.0);
  const auto tr = simulate_particle_system(m, init, R, N, cfg);
  const auto ms = square_stats(tr.states.back());
  // Euler variance: dt/(1-(1-dt)^2) (1 - (1-dt)^{2n}); continuous limit 0.49998
  const double exact = 0.5 * (1.0 - std::exp(-10.0));
  CHECK(std::abs(ms.mean - exact) < 3.0 * ms.se + 1e-3);
}

TEST_CASE("Brownian second moment grows like beta d T") {
  const auto m = brownian(0.7);
  SimConfig cfg;
  cfg.dt = 0.01;
  cfg.T = 2.0;
  cfg.seed = 5;
  const std::size_t R = 50, N = 400;
  std::vector<double> init(R * N, 1.0);
  const auto tr = simulate_particle_system(m, init, R, N, cfg);
  const auto ms = square_stats(tr.states.back());
  CHECK(std::abs(ms.mean - 1.0 - 0.7 * 2.0) < 3.0 * ms.se);
}

TEST_CASE("permuting particles together with their streams permutes the trajectory") {
  const auto m = interacting();
  SimConfig cfg;
  cfg.dt = 0.01;
  cfg.T = 0.5;
  cfg.seed = 99;
  cfg.record_every = 10;
  const std::size_t N = 7;
  InitSpec s;
  const auto init = sample_init_block(s, 1, N, 1, 4);
  std::vector<std::uint32_t> ids(N), perm = {3, 0, 6, 1, 5, 2, 4};
  std::iota(ids.begin(), ids.end(), 0u);
  const auto ref = simulate_particle_system(m, init, 1, N, cfg, ids);
  std::vector<double> pinit(N);
  std::vector<std::uint32_t> pids(N);
  for (std::size_t i = 0; i < N; ++i) {
    pinit[i] = init[perm[i]];
    pids[i] = ids[perm[i]];
  }
  const auto got = simulate_particle_system(m, pinit, 1, N, cfg, pids);
  REQUIRE(got.states.size() == ref.states.size());
  for (std::size_t k = 0; k < ref.states.size(); ++k)
    for (std::size_t i = 0; i < N; ++i) CHECK(got.states[k][i] == ref.states[k][perm[i]]);
}

TEST_CASE("a single particle feels its own interaction terms") {
  // b1(x,x) = 0 for the consensus drift, sigma(x,x) = c M
  const auto m = interacting();
  SimConfig cfg;
  cfg.dt = 0.01;
  cfg.T = 0.2;
  cfg.seed = 1;
  const auto tr = simulate_particle_system(m, std::vector<double>{0.3}, 1, 1, cfg);
  // reproduce by hand with the same streams
  NoiseSource src(cfg.seed, purpose::particle_system);
  double x = 0.3;
  for (std::size_t s = 0; s < cfg.steps(); ++s) {
    std::vector<double> w(1), b(1);
    src.normals(Channel::W, 0, 0, s, w);
    src.normals(Channel::B, 0, 0, s, b);
    x += -x * cfg.dt + std::sqrt(cfg.dt) * (w[0] + 0.4 * b[0]);
  }
  CHECK(tr.states.back()[0] == doctest::Approx(x).epsilon(1e-12));
}

TEST_CASE("trajectories do not depend on the thread count") {
  const auto m = interacting();
  SimConfig cfg;
  cfg.dt = 0.01;
  cfg.T = 0.3;
  cfg.seed = 8;
  InitSpec s;
  const auto init = sample_init_block(s, 3, 64, 1, 2);
  set_threads(1);
  const auto a = simulate_particle_system(m, init, 3, 64, cfg);
  set_threads(4);
  const auto b = simulate_particle_system(m, init, 3, 64, cfg);
  cfg.exec = Exec::serial;
  const auto c = simulate_particle_system(m, init, 3, 64, cfg);
  set_threads(0);
  CHECK(a.states == b.states);
  // the serial reference goes through the generic evaluators
  for (std::size_t k = 0; k < a.states.size(); ++k)
    for (std::size_t i = 0; i < a.states[k].size(); ++i)
      CHECK(c.states[k][i] == doctest::Approx(a.states[k][i]).epsilon(1e-12));
}

TEST_CASE("Euler-Maruyama converges with strong order one for additive noise") {
  // coupled Brownian paths across resolutions; reference at dt/64
  const auto m = ou();
  const std::size_t P = 2000, fine_steps = 640;
  const double T = 1.0, h = T / fine_steps;
  NoiseSource src(77, purpose::audit);
  std::vector<std::vector<double>> incr(P, std::vector<double>(fine_steps));
  for (std::size_t p = 0; p < P; ++p) {
    src.normals(Channel::W, 0, static_cast<std::uint32_t>(p), 0, incr[p]);
    for (double& v : incr[p]) v *= std::sqrt(h);
  }
  auto solve = [&](std::size_t stride) {
    std::vector<double> out(P);
    for (std::size_t p = 0; p < P; ++p) {
      ParticleEnsemble e;
      e.N = 1;
      e.states = {1.0};
      for (std::size_t s = 0; s < fine_steps; s += stride) {
        double dw = 0.0;
        for (std::size_t j = 0; j < stride; ++j) dw += incr[p][s + j];
        e = step_particle_system(m, e, h * stride, std::vector<double>{dw},
                                 std::vector<double>{0.0}, Exec::serial);
      }
      out[p] = e.states[0];
    }
    return out;
  };
  const auto ref = solve(1);
  auto err = [&](std::size_t stride) {
    const auto x = solve(stride);
    double s = 0.0;
    for (std::size_t p = 0; p < P; ++p) s += (x[p] - ref[p]) * (x[p] - ref[p]);
    return std::sqrt(s / P);
  };
  const double e1 = err(16), e2 = err(8);
  CHECK(std::log2(e1 / e2) >= 0.9);
}

// ------------------------------------------------------------ flows

TEST_CASE("reference flow: OU second moment, mean decay, initial cloud") {
  const auto m = interacting();
  InitSpec s;
  s.kind = InitSpec::Kind::gaussian;
  s.center = {1.0};
  s.scale = 0.5;
  SimConfig cfg;
  cfg.dt = 0.01;
  cfg.T = 1.0;
  cfg.seed = 3;
  cfg.record_every = 10;
  const std::size_t Nref = 4000;
  std::string warn;
  const auto flow = simulate_reference_flow(m, Nref, s, cfg, &warn, 1000);
  CHECK_FALSE(warn.empty());  // 4000 < 8 * 1000
  CHECK(flow.times.front() == 0.0);
  // flow at t=0 is the sampled cloud (as a multiset)
  auto c0 = flow.clouds[0].states;
  auto drawn = sample_exchangeable_init(s, Nref, 1, cfg.seed ^ 0x5EF5EF5EFull).states;
  std::sort(c0.begin(), c0.end());
  std::sort(drawn.begin(), drawn.end());
  CHECK(c0 == drawn);
  // consensus drift cancels in the mean: E X_t = e^{-t} E X_0
  const auto& last = flow.clouds.back();
  const double m1 = compensated_mean(last.states);
  const double m0 = compensated_mean(flow.clouds[0].states);
  CHECK(std::abs(m1 - m0 * std::exp(-1.0)) < 4.0 * std::sqrt(0.6 / Nref));
}

TEST_CASE("reference flow without interaction follows the OU variance curve") {
  const auto m = ou();
  InitSpec s;
  s.kind = InitSpec::Kind::point;
  SimConfig cfg;
  cfg.dt = 0.005;
  cfg.T = 2.0;
  cfg.seed = 12;
  cfg.record_every = 100;
  const auto flow = simulate_reference_flow(m, 20000, s, cfg);
  for (std::size_t k = 1; k < flow.size(); ++k) {
    const double t = flow.times[k];
    const auto ms = square_stats(flow.clouds[k].states);
    CHECK(std::abs(ms.mean - 0.5 * (1.0 - std::exp(-2.0 * t))) < 3.0 * ms.se + 5e-3);
  }
}

TEST_CASE("decoupled SDE under a centred frozen flow is free noise") {
  // b1(x, y) = y has zero mean against a cloud symmetric around 0
  ModelSpec m = brownian(0.01);
  m.b1 = [](const double*, const double* y, double* out) { out[0] = y[0]; };
  const auto flow = single_cloud({-1.0, 1.0});
  SimConfig cfg;
  cfg.dt = 0.01;
  cfg.T = 1.0;
  cfg.seed = 2;
  const std::size_t P = 20000;
  const auto tr = simulate_decoupled(m, flow, 0.0, std::vector<double>(P, 0.0), P, cfg);
  const auto ms = square_stats(tr.states.back());
  CHECK(std::abs(ms.mean - 0.01) < 3.0 * ms.se);
  CHECK(std::abs(compensated_mean(tr.states.back())) < 4.0 * std::sqrt(0.01 / P));
  CHECK_THROWS_AS(simulate_decoupled(m, flow, -1.0, std::vector<double>{0.0}, 1, cfg), DomainError);
}

TEST_CASE("decoupled marginal matches the reference flow") {
  const auto m = interacting();
  InitSpec s;
  s.scale = 0.8;
  SimConfig cfg;
  cfg.dt = 0.01;
  cfg.T = 1.0;
  cfg.seed = 31;
  cfg.record_every = 10;
  const std::size_t Nref = 4000;
  const auto flow = simulate_reference_flow(m, Nref, s, cfg);
  const auto z = sample_exchangeable_init(s, Nref, 1, 555).states;
  SimConfig dc = cfg;
  dc.seed = 32;
  const auto tr = simulate_decoupled(m, flow, 0.0, z, Nref, dc);
  const auto ks = ks_two_sample(tr.states.back(), flow.clouds.back().states);
  CHECK(ks.p > 0.001);
}

TEST_CASE("flow lookup is piecewise constant from the left") {
  MeasureFlow f;
  f.times = {0.0, 1.0, 2.0};
  for (int i = 0; i < 3; ++i) {
    ParticleEnsemble e;
    e.N = 1;
    e.states = {double(i)};
    f.clouds.push_back(e);
  }
  CHECK(f.index_at(0.0) == 0);
  CHECK(f.index_at(0.999) == 0);
  CHECK(f.index_at(1.0) == 1);
  CHECK(f.index_at(7.0) == 2);
  CHECK_THROWS_AS(f.index_at(-0.5), DomainError);
}

// ---------------------------------------------------- gradient constant

TEST_CASE("gradient constant: Brownian motion preserves affine maps") {
  const auto m = brownian();
  const auto flow = single_cloud({0.0});
  GradientOptions opt;
  opt.st = {{0.0, 0.5}, {0.0, 2.0}};
  opt.z_grid = {{-1.0}, {0.0}, {1.0}};
  opt.mc = 500;
  opt.dt = 0.01;
  const std::vector<TestFunction> tests = {clipped_coordinate(0, 10.0)};
  const auto g1 = estimate_cG(m, flow, tests, opt);
  CHECK(g1.cG == doctest::Approx(1.0).epsilon(1e-9));
  opt.orders = {2};
  const auto g2 = estimate_cG(m, flow, tests, opt);
  CHECK(g2.cG < 1e-6);
}

TEST_CASE("gradient constant: OU semigroup derivative") {
  const auto m = ou();
  const auto flow = single_cloud({0.0});
  GradientOptions opt;
  opt.st = {{0.0, 0.5}};
  opt.z_grid = {{0.2}};
  opt.mc = 1000;
  opt.dt = 1e-3;
  const auto g = estimate_cG(m, flow, {clipped_coordinate(0, 10.0)}, opt);
  // Euler bias (1-dt)^n vs e^{-t} is below t dt
  CHECK(std::abs(g.cG - std::exp(-0.5)) <= 3.0 * g.stderr + 0.5 * 1e-3);
}
