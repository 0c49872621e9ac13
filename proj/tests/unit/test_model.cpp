#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "chaoskit/error.hpp"
#include "chaoskit/model.hpp"
#include "chaoskit/model_json.hpp"
#include "chaoskit/numeric.hpp"
#include "chaoskit/quadrature.hpp"
#include "chaoskit/rng.hpp"

using namespace chaoskit;

// ---------------------------------------------------------------- rng

TEST_CASE("philox is a pure function of counter and key") {
  const auto a = philox4x32({1, 2, 3, 4}, {5, 6});
  const auto b = philox4x32({1, 2, 3, 4}, {5, 6});
  CHECK(a == b);
  CHECK(a != philox4x32({1, 2, 3, 5}, {5, 6}));
  CHECK(a != philox4x32({1, 2, 3, 4}, {5, 7}));
}

TEST_CASE("noise streams are addressable and independent of call order") {
  NoiseSource src(42, purpose::particle_system);
  std::vector<double> x(8), y(8), z(8);
  src.normals(Channel::W, 3, 7, 100, x);
  src.normals(Channel::W, 0, 0, 0, z);  // unrelated draw in between
  src.normals(Channel::W, 3, 7, 100, y);
  CHECK(x == y);
  src.normals(Channel::B, 3, 7, 100, z);
  CHECK(x != z);
  CHECK(src.split(1).key() != src.split(2).key());
  CHECK(NoiseSource(42, purpose::particle_system).key() != NoiseSource(42, purpose::reference_flow).key());
}

TEST_CASE("normals have unit variance and uniforms stay inside (0,1)") {
  NoiseSource src(9, purpose::audit);
  const std::size_t n = 200000;
  std::vector<double> v(n), u(n);
  src.normals(Channel::Misc, 0, 0, 0, v);
  src.uniforms(Channel::Misc, 0, 1, 0, u);
  CompensatedSum s1, s2;
  for (double x : v) {
    s1.add(x);
    s2.add(x * x);
  }
  const double mean = s1.value() / n, var = s2.value() / n - mean * mean;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(double(n)));
  CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / n));
  CHECK(*std::min_element(u.begin(), u.end()) > 0.0);
  CHECK(*std::max_element(u.begin(), u.end()) < 1.0);
}

TEST_CASE("sequential rng below() covers its range") {
  SequentialRng rng(NoiseSource(1, purpose::bootstrap));
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto k = rng.below(7);
    CHECK(k < 7);
    seen.insert(k);
  }
  CHECK(seen.size() == 7);
}

// ---------------------------------------------------------- quadrature

TEST_CASE("adaptive Gauss-Kronrod integrates smooth and peaked integrands") {
  auto r = integrate([](double x) { return std::exp(-x * x); }, 0.0, 6.0);
  CHECK(r.value == doctest::Approx(0.5 * std::sqrt(std::numbers::pi) * std::erf(6.0)).epsilon(1e-13));
  r = integrate([](double x) { return std::sqrt(x); }, 0.0, 1.0, 1e-10);
  CHECK(r.value == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  CHECK(r.converged);
  const auto p = gauss_kronrod_panel([](double x) { return x * x * x * x; }, -1.0, 2.0);
  CHECK(p.value == doctest::Approx(33.0 / 5.0).epsilon(1e-14));
}

// ------------------------------------------------------------- profile

TEST_CASE("piecewise profile branch values") {
  const auto g = DissipativityProfile::piecewise(1.0, 3.0, 1.0);
  CHECK(gamma_profile(g, 0.0) == 0.0);
  CHECK(gamma_profile(g, 1.0) == doctest::Approx(1.0));
  CHECK(gamma_profile(g, 1.5) == doctest::Approx(-1.5));
  CHECK(gamma_profile(g, 2.0) == doctest::Approx(-6.0));
  CHECK_THROWS_AS(gamma_profile(g, -0.1), DomainError);
}

TEST_CASE("piecewise profile is continuous, below K1 r, and equals -K2 r past 2R") {
  for (auto [K1, K2, R] : std::vector<std::array<double, 3>>{{1, 3, 1}, {0, 1, 1}, {2.5, 0.7, 0.3}}) {
    const auto g = DissipativityProfile::piecewise(K1, K2, R);
    for (double b : {R, 2.0 * R}) {
      const double e = 1e-12 * R;
      CHECK(std::abs(g(b + e) - g(b - e)) < 1e-9);
    }
    for (int i = 0; i <= 4000; ++i) {
      const double r = 5.0 * R * i / 4000.0;
      CHECK(g(r) <= K1 * r + 1e-12);
      if (r >= 2.0 * R) CHECK(g(r) == doctest::Approx(-K2 * r));
    }
  }
}

// --------------------------------------------------------- mean field

namespace {
ModelSpec consensus_model(double kappa) {
  ModelSpec m;
  m.d = 1;
  m.n = 1;
  m.b0 = [](const double*, double* out) { out[0] = 0.0; };
  m.b1 = [kappa](const double* x, const double* y, double* out) { out[0] = kappa * (y[0] - x[0]); };
  return m;
}
}  // namespace

TEST_CASE("mean-field fields include the self term") {
  const auto m = consensus_model(1.0);
  const std::vector<double> cloud = {1.0, 3.0}, x = {1.0};
  const auto f = eval_mean_field_fields(m, x, cloud);
  CHECK(f.drift[0] == doctest::Approx(1.0));
  CHECK(f.diffusion[0] == 0.0);
  CHECK_THROWS_AS(eval_mean_field_fields(m, x, std::vector<double>{}), DomainError);
}

TEST_CASE("constant diffusion averages to itself and zero coefficients give zero") {
  ModelSpec m;
  m.d = 2;
  m.n = 2;
  m.b0 = [](const double*, double* out) { out[0] = out[1] = 0.0; };
  const std::vector<double> cloud = {1, 2, -3, 4, 0.5, 0.25}, x = {7, 8};
  auto f = eval_mean_field_fields(m, x, cloud);
  CHECK(f.drift == std::vector<double>{0.0, 0.0});
  CHECK(f.diffusion == std::vector<double>(4, 0.0));
  m.sigma = [](const double*, const double*, double* out) {
    out[0] = 0.3, out[1] = -0.1, out[2] = 0.0, out[3] = 2.0;
  };
  f = eval_mean_field_fields(m, x, cloud);
  CHECK(f.diffusion[0] == doctest::Approx(0.3));
  CHECK(f.diffusion[1] == doctest::Approx(-0.1));
  CHECK(f.diffusion[3] == doctest::Approx(2.0));
}

TEST_CASE("non-finite coefficient output is reported") {
  auto m = consensus_model(1.0);
  m.b1 = [](const double*, const double*, double* out) { out[0] = std::nan(""); };
  CHECK_THROWS_AS(eval_mean_field_fields(m, std::vector<double>{0.0}, std::vector<double>{1.0}),
                  NumericError);
}

TEST_CASE("mean-field fields are invariant under cloud permutation") {
  LinearParams p;
  p.d = 2;
  p.n = 2;
  p.kappa = 0.3;
  p.sigma_scale = 0.2;
  const auto m = make_linear_model(p);
  SequentialRng rng(NoiseSource(3, purpose::audit));
  std::vector<double> cloud(2 * 50);
  for (double& v : cloud) v = rng.normal();
  const std::vector<double> x = {0.3, -0.7};
  const auto ref = eval_mean_field_fields(m, x, cloud);
  std::vector<std::size_t> idx(50);
  for (std::size_t i = 0; i < 50; ++i) idx[i] = (i * 17 + 5) % 50;
  std::vector<double> perm(cloud.size());
  for (std::size_t i = 0; i < 50; ++i)
    for (int k = 0; k < 2; ++k) perm[i * 2 + k] = cloud[idx[i] * 2 + k];
  const auto got = eval_mean_field_fields(m, x, perm);
  CHECK(got.drift == ref.drift);
  CHECK(got.diffusion == ref.diffusion);
}

// --------------------------------------------------------- assumptions

TEST_CASE("constant sigma passes the Lipschitz audit with ratio 0") {
  ModelSpec m;
  m.d = 1;
  m.n = 1;
  m.constants = {0.0, 1.0, 1.0, 0.0, 1.0};
  m.profile = DissipativityProfile::override_fn([](double r) { return -r; }, 1.0, 0.0);
  m.b0 = [](const double* x, double* out) { out[0] = -x[0]; };
  m.sigma = [](const double*, const double*, double* out) { out[0] = 0.5; };
  const auto rep = verify_assumptions(m, 500, 3.0, 1);
  CHECK(rep.sigma_lipschitz.max_ratio == 0.0);
  CHECK(rep.sigma_bound.max_ratio <= 0.25 + 1e-12);
  CHECK(rep.dissipativity.max_ratio == doctest::Approx(1.0));
  CHECK(rep.pass);
}

TEST_CASE("built-in linear model audit stays within its constants") {
  LinearParams p;
  p.d = 2;
  p.n = 2;
  p.kappa = 0.2;
  p.sigma_scale = 0.3;
  const auto m = make_linear_model(p);
  const auto rep = verify_assumptions(m, 2000, 4.0, 11);
  CHECK(rep.pass);
  CHECK(rep.dissipativity.max_ratio <= 1.0 + 1e-12);
  CHECK(rep.b1_lipschitz.max_ratio <= 1.0 + 1e-12);
  CHECK(rep.sigma_lipschitz.max_ratio <= 1.0 + 1e-12);
  CHECK(rep.sigma_bound.max_ratio <= 1.0 + 1e-12);
}

TEST_CASE("an understated constant yields a violation witness") {
  auto m = consensus_model(2.0);
  m.constants = {0.0, 1.0, 1.0, 0.5, 0.0};
  m.b0 = [](const double* x, double* out) { out[0] = -x[0]; };
  m.profile = DissipativityProfile::override_fn([](double r) { return -r; }, 1.0, 0.0);
  const auto rep = verify_assumptions(m, 500, 2.0, 5);
  CHECK_FALSE(rep.pass);
  CHECK_FALSE(rep.b1_lipschitz.pass);
  REQUIRE(rep.b1_lipschitz.witness.has_value());
  CHECK(rep.b1_lipschitz.witness->lhs > rep.b1_lipschitz.witness->rhs);
}

TEST_CASE("double-well fit dominates a brute-force grid maximisation") {
  DoubleWellParams p;
  const auto m = make_double_well_model(p);
  CHECK(m.profile.kind() == DissipativityProfile::Kind::piecewise);
  const auto& g = m.profile;
  // independent oracle: sup over pairs in [-5,5]^2 of <x-y, b(x)-b(y)>/|x-y| vs gamma(|x-y|)
  const int n = 401;
  double worst = -1e300;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double x = -5.0 + 10.0 * i / (n - 1), y = -5.0 + 10.0 * j / (n - 1);
      const double r = std::abs(x - y);
      if (r < 1e-9) continue;
      const double bx = x - x * x * x, by = y - y * y * y;
      worst = std::max(worst, (x - y) * (bx - by) / r - g(r));
    }
  CHECK(worst <= 1e-9);
  const auto rep = verify_assumptions(m, 3000, 2.5, 3);
  CHECK(rep.dissipativity.pass);
}

TEST_CASE("power iteration recovers the top eigenvalue") {
  const std::vector<double> a = {2.0, 1.0, 1.0, 2.0};
  CHECK(power_iteration_max_eig(a, 2) == doctest::Approx(3.0).epsilon(1e-12));
}

// ----------------------------------------------------------------- json

TEST_CASE("model documents load and unknown families name the field") {
  const auto m = load_model(nlohmann::json::parse(
      R"({"family": "linear", "d": 1, "beta": 0.5, "params": {"a": 2.0, "kappa": 0.1}})"));
  CHECK(m.beta == 0.5);
  CHECK(m.constants.K2 == 2.0);
  CHECK(m.has_b1());
  try {
    load_model(nlohmann::json::parse(R"({"family": "landau"})"));
    FAIL("expected LoadError");
  } catch (const LoadError& e) {
    CHECK(e.field() == "family");
  }
  CHECK_THROWS_AS(load_model(nlohmann::json::parse(R"({"family": "linear", "beta": -1})")), LoadError);
}
