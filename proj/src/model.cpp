#include "chaoskit/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chaoskit/error.hpp"
#include "chaoskit/numeric.hpp"
#include "chaoskit/rng.hpp"

namespace chaoskit {

DissipativityProfile DissipativityProfile::piecewise(double K1, double K2, double R) {
  if (!(K1 >= 0.0)) throw DomainError("profile: K1 must be >= 0");
  if (!(R > 0.0)) throw DomainError("profile: R must be > 0");
  if (!std::isfinite(K2)) throw DomainError("profile: K2 must be finite");
  DissipativityProfile p;
  p.kind_ = Kind::piecewise;
  p.K1_ = K1;
  p.K2_ = K2;
  p.R_ = R;
  p.tail_radius_ = 2.0 * R;
  p.label_ = "piecewise";
  return p;
}

DissipativityProfile DissipativityProfile::override_fn(std::function<double(double)> gamma,
                                                       double tail_K2, double tail_radius,
                                                       std::string label) {
  if (!gamma) throw DomainError("profile: override needs a function");
  if (!(tail_radius >= 0.0)) throw DomainError("profile: tail radius must be >= 0");
  DissipativityProfile p;
  p.kind_ = Kind::override_fn;
  p.fn_ = std::move(gamma);
  p.K2_ = tail_K2;
  p.K1_ = 0.0;
  p.R_ = tail_radius > 0.0 ? 0.5 * tail_radius : 1.0;
  p.tail_radius_ = tail_radius;
  p.label_ = std::move(label);
  return p;
}

double DissipativityProfile::operator()(double r) const {
  if (kind_ == Kind::override_fn) return fn_(r);
  if (r <= R_) return K1_ * r;
  if (r <= 2.0 * R_) return (-(K1_ + K2_) * (r - R_) / R_ + K1_) * r;
  return -K2_ * r;
}

double gamma_profile(const DissipativityProfile& profile, double r) {
  if (!(r >= 0.0)) throw DomainError("gamma_profile: r must be >= 0");
  return profile(r);
}

void ModelSpec::validate() const {
  if (d < 1) throw DomainError("model: d must be positive");
  if (n < 1) throw DomainError("model: n must be positive");
  if (!(beta > 0.0)) throw DomainError("model: beta must be > 0");
  if (!b0) throw DomainError("model: b0 missing");
  if (!(constants.R > 0.0)) throw DomainError("model: R must be > 0");
  if (!(constants.K1 >= 0.0)) throw DomainError("model: K1 must be >= 0");
  if (!(constants.Kb >= 0.0)) throw DomainError("model: Kb must be >= 0");
  if (!(constants.Ksigma >= 0.0)) throw DomainError("model: Ksigma must be >= 0");
  if (radial && radial->matrix.size() != static_cast<std::size_t>(d * n))
    throw DomainError("model: radial diffusion matrix must be d x n");
}

namespace {

void check_finite(std::span<const double> v, std::span<const double> x, std::span<const double> y,
                  const char* what) {
  for (double e : v) {
    if (!std::isfinite(e)) {
      std::ostringstream os;
      os << what << " not finite at pair x=(";
      for (std::size_t k = 0; k < x.size(); ++k) os << (k ? "," : "") << x[k];
      os << ") y=(";
      for (std::size_t k = 0; k < y.size(); ++k) os << (k ? "," : "") << y[k];
      os << ")";
      throw NumericError(os.str());
    }
  }
}

}  // namespace

MeanFieldFields eval_mean_field_fields(const ModelSpec& model, std::span<const double> x,
                                       std::span<const double> cloud) {
  const int d = model.d, n = model.n;
  if (cloud.empty()) throw DomainError("eval_mean_field_fields: empty cloud");
  if (x.size() != static_cast<std::size_t>(d) || cloud.size() % d != 0)
    throw DomainError("eval_mean_field_fields: dimension mismatch");
  for (double e : x)
    if (!std::isfinite(e)) throw DomainError("eval_mean_field_fields: x not finite");

  const std::size_t N = cloud.size() / d;
  MeanFieldFields out;
  out.drift.assign(d, 0.0);
  out.diffusion.assign(static_cast<std::size_t>(d) * n, 0.0);

  model.b0(x.data(), out.drift.data());
  check_finite(out.drift, x, x, "b0");

  std::vector<CompensatedSum> db(d), ds(static_cast<std::size_t>(d) * n);
  std::vector<double> tmp_b(d), tmp_s(static_cast<std::size_t>(d) * n);
  for (std::size_t j = 0; j < N; ++j) {
    const double* y = cloud.data() + j * d;
    if (model.has_b1()) {
      model.b1(x.data(), y, tmp_b.data());
      check_finite(tmp_b, x, {y, static_cast<std::size_t>(d)}, "b1");
      for (int k = 0; k < d; ++k) db[k].add(tmp_b[k]);
    }
    if (model.has_sigma()) {
      model.sigma(x.data(), y, tmp_s.data());
      check_finite(tmp_s, x, {y, static_cast<std::size_t>(d)}, "sigma");
      for (std::size_t k = 0; k < tmp_s.size(); ++k) ds[k].add(tmp_s[k]);
    }
  }
  const double inv = 1.0 / static_cast<double>(N);
  for (int k = 0; k < d; ++k) out.drift[k] += db[k].value() * inv;
  for (std::size_t k = 0; k < ds.size(); ++k) out.diffusion[k] = ds[k].value() * inv;
  return out;
}

double power_iteration_max_eig(std::span<const double> a, int dim, int iters, double tol) {
  if (dim == 1) return a[0];
  std::vector<double> v(dim), w(dim);
  for (int i = 0; i < dim; ++i) v[i] = 1.0 + 0.01 * i;  // generic start
  double nv = std::sqrt(norm2(v.data(), dim));
  for (double& e : v) e /= nv;
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    for (int i = 0; i < dim; ++i) w[i] = dot(a.data() + static_cast<std::size_t>(i) * dim, v.data(), dim);
    const double next = dot(v.data(), w.data(), dim);
    const double nw = std::sqrt(norm2(w.data(), dim));
    if (nw == 0.0) return 0.0;
    for (int i = 0; i < dim; ++i) v[i] = w[i] / nw;
    if (std::abs(next - lambda) <= tol * std::max(1.0, std::abs(next))) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

namespace {

void sample_ball(SequentialRng& rng, int d, double radius, double* out) {
  double s = 0.0;
  for (int k = 0; k < d; ++k) {
    out[k] = rng.normal();
    s += out[k] * out[k];
  }
  const double r = radius * std::pow(rng.uniform(), 1.0 / d);
  const double scale = s > 0.0 ? r / std::sqrt(s) : 0.0;
  for (int k = 0; k < d; ++k) out[k] *= scale;
}

double safe_ratio(double lhs, double rhs) {
  if (rhs > 0.0) return lhs / rhs;
  if (rhs == 0.0) return lhs <= 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  // rhs < 0: only a more negative lhs is admissible.
  if (lhs < 0.0) return rhs / lhs;
  return std::numeric_limits<double>::infinity();
}

void record(AssumptionCheck& c, double ratio, double lhs, double rhs, const double* x1,
            const double* y1, const double* x2, const double* y2, int d) {
  if (ratio > c.max_ratio || (!c.witness && ratio == c.max_ratio && ratio > 0.0)) {
    c.max_ratio = ratio;
    AssumptionWitness w;
    w.x1.assign(x1, x1 + d);
    w.y1.assign(y1, y1 + d);
    w.x2.assign(x2, x2 + d);
    w.y2.assign(y2, y2 + d);
    w.lhs = lhs;
    w.rhs = rhs;
    c.witness = std::move(w);
  }
}

}  // namespace

AssumptionReport verify_assumptions(const ModelSpec& model, std::size_t sample_budget,
                                    double radius, std::uint64_t seed, double tol) {
  if (sample_budget < 1) throw DomainError("verify_assumptions: sample_budget must be >= 1");
  if (!(radius > 0.0)) throw DomainError("verify_assumptions: radius must be > 0");
  const int d = model.d, n = model.n;
  const auto& K = model.constants;

  AssumptionReport rep;
  rep.samples = sample_budget;
  rep.tolerance = tol;
  rep.sigma_lipschitz.name = "sigma_lipschitz";
  rep.sigma_bound.name = "sigma_bound";
  rep.b1_lipschitz.name = "b1_lipschitz";
  rep.dissipativity.name = "dissipativity";

  SequentialRng rng(NoiseSource(seed, purpose::audit));
  std::vector<double> x1(d), y1(d), x2(d), y2(d), b_a(d), b_b(d);
  std::vector<double> s1(static_cast<std::size_t>(d) * n), s2(s1.size()), sst(static_cast<std::size_t>(d) * d);

  for (std::size_t it = 0; it < sample_budget; ++it) {
    sample_ball(rng, d, radius, x1.data());
    sample_ball(rng, d, radius, y1.data());
    sample_ball(rng, d, radius, x2.data());
    sample_ball(rng, d, radius, y2.data());
    const double dx2 = dist2(x1.data(), x2.data(), d);
    const double dy2 = dist2(y1.data(), y2.data(), d);

    if (model.has_sigma()) {
      model.sigma(x1.data(), y1.data(), s1.data());
      model.sigma(x2.data(), y2.data(), s2.data());
      check_finite(s1, x1, y1, "sigma");
      check_finite(s2, x2, y2, "sigma");
      double hs = 0.0;
      for (std::size_t k = 0; k < s1.size(); ++k) hs += (s1[k] - s2[k]) * (s1[k] - s2[k]);
      const double lhs = 0.5 * hs, rhs = K.Ksigma * (dx2 + dy2);
      record(rep.sigma_lipschitz, safe_ratio(lhs, rhs), lhs, rhs, x1.data(), y1.data(), x2.data(),
             y2.data(), d);
      // sigma sigma^T, d x d
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          double s = 0.0;
          for (int k = 0; k < n; ++k) s += s1[i * n + k] * s1[j * n + k];
          sst[static_cast<std::size_t>(i) * d + j] = s;
        }
      const double lam = power_iteration_max_eig(sst, d);
      record(rep.sigma_bound, safe_ratio(lam, K.Ksigma), lam, K.Ksigma, x1.data(), y1.data(),
             x1.data(), y1.data(), d);
    }

    if (model.has_b1()) {
      model.b1(x1.data(), y1.data(), b_a.data());
      model.b1(x2.data(), y2.data(), b_b.data());
      check_finite(b_a, x1, y1, "b1");
      check_finite(b_b, x2, y2, "b1");
      const double lhs = std::sqrt(dist2(b_a.data(), b_b.data(), d));
      const double rhs = K.Kb * (std::sqrt(dx2) + std::sqrt(dy2));
      record(rep.b1_lipschitz, safe_ratio(lhs, rhs), lhs, rhs, x1.data(), y1.data(), x2.data(),
             y2.data(), d);
    }

    model.b0(x1.data(), b_a.data());
    model.b0(x2.data(), b_b.data());
    check_finite(b_a, x1, x1, "b0");
    check_finite(b_b, x2, x2, "b0");
    double lhs = 0.0;
    for (int k = 0; k < d; ++k) lhs += (x1[k] - x2[k]) * (b_a[k] - b_b[k]);
    const double r = std::sqrt(dx2);
    const double rhs = model.profile(r) * r;
    record(rep.dissipativity, safe_ratio(lhs, rhs), lhs, rhs, x1.data(), x1.data(), x2.data(),
           x2.data(), d);
  }

  for (AssumptionCheck* c : {&rep.sigma_lipschitz, &rep.sigma_bound, &rep.b1_lipschitz,
                             &rep.dissipativity}) {
    c->pass = c->max_ratio <= 1.0 + tol;
    if (c->pass) c->witness.reset();
    rep.pass = rep.pass && c->pass;
  }
  return rep;
}

namespace {

std::vector<double> default_matrix(int d, int n) {
  std::vector<double> m(static_cast<std::size_t>(d) * n, 0.0);
  for (int i = 0; i < std::min(d, n); ++i) m[static_cast<std::size_t>(i) * n + i] = 1.0;
  return m;
}

double op_norm2(const std::vector<double>& m, int d, int n) {
  std::vector<double> mmt(static_cast<std::size_t>(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += m[i * n + k] * m[j * n + k];
      mmt[static_cast<std::size_t>(i) * d + j] = s;
    }
  return power_iteration_max_eig(mmt, d, 5000, 1e-15);
}

// Attaches b1 / sigma for the consensus + radial interaction shared by the
// built-in families, and returns (Kb, Ksigma).
std::pair<double, double> attach_interaction(ModelSpec& m, double kappa, double scale,
                                             std::vector<double> matrix) {
  const int d = m.d, n = m.n;
  if (matrix.empty()) matrix = default_matrix(d, n);
  if (matrix.size() != static_cast<std::size_t>(d * n))
    throw DomainError("model: sigma_matrix must have d*n entries");
  if (kappa != 0.0) {
    m.consensus = ConsensusDrift{kappa};
    m.b1 = [kappa, d](const double* x, const double* y, double* out) {
      for (int k = 0; k < d; ++k) out[k] = kappa * (y[k] - x[k]);
    };
  }
  double Ks = 0.0;
  if (scale != 0.0) {
    m.radial = RadialDiffusion{scale, matrix};
    m.sigma = [scale, matrix, d, n](const double* x, const double* y, double* out) {
      const double g = scale / std::sqrt(1.0 + dist2(x, y, d));
      for (int k = 0; k < d * n; ++k) out[k] = g * matrix[k];
    };
    double hs = 0.0;
    for (double e : matrix) hs += e * e;
    const double c2 = scale * scale;
    Ks = std::max(c2 * op_norm2(matrix, d, n), c2 * hs * kRadialLipschitz * kRadialLipschitz);
  }
  return {std::abs(kappa), Ks};
}

}  // namespace

ModelSpec make_linear_model(const LinearParams& p) {
  if (!(p.a > 0.0)) throw DomainError("linear model: a must be > 0");
  ModelSpec m;
  m.family = "linear";
  m.d = p.d;
  m.n = p.n;
  m.beta = p.beta;
  const double a = p.a;
  const int d = p.d;
  m.b0 = [a, d](const double* x, double* out) {
    for (int k = 0; k < d; ++k) out[k] = -a * x[k];
  };
  auto [Kb, Ks] = attach_interaction(m, p.kappa, p.sigma_scale, p.sigma_matrix);
  m.constants = ModelConstants{0.0, a, 1.0, Kb, Ks};
  m.profile = DissipativityProfile::override_fn([a](double r) { return -a * r; }, a, 0.0,
                                                "linear");
  m.certified = true;
  m.validate();
  return m;
}

ModelSpec make_double_well_model(const DoubleWellParams& p) {
  ModelSpec m;
  m.family = "double_well";
  m.d = p.d;
  m.n = p.n;
  m.beta = p.beta;
  const int d = p.d;
  m.b0 = [d](const double* x, double* out) {
    const double r2 = norm2(x, d);
    for (int k = 0; k < d; ++k) out[k] = x[k] - r2 * x[k];
  };
  auto [Kb, Ks] = attach_interaction(m, p.kappa, p.sigma_scale, p.sigma_matrix);
  const auto fit = fit_dissipativity(m, p.fit_K2, p.fit_extent);
  m.constants = ModelConstants{fit.K1, fit.K2, fit.R, Kb, Ks};
  m.profile = DissipativityProfile::piecewise(fit.K1, fit.K2, fit.R);
  m.certified = true;
  m.validate();
  return m;
}

DissipativityFit fit_dissipativity(const ModelSpec& model, double K2, double extent,
                                   std::size_t grid, std::uint64_t seed) {
  if (!(K2 > 0.0)) throw DomainError("fit_dissipativity: K2 must be > 0");
  if (!(extent > 0.0)) throw DomainError("fit_dissipativity: extent must be > 0");
  if (grid < 8) throw DomainError("fit_dissipativity: grid too small");
  const int d = model.d;
  DissipativityFit fit;
  fit.K2 = K2;
  const double rmax = 2.0 * extent;
  // Log-spaced radii near 0 (where sup psi(r)/r usually sits), then uniform.
  const std::size_t nlog = 24;
  for (std::size_t g = 0; g < nlog; ++g)
    fit.r.push_back(rmax * 1e-7 * std::pow(1e5 / grid, static_cast<double>(g) / nlog));
  for (std::size_t g = 0; g < grid; ++g)
    fit.r.push_back(rmax * static_cast<double>(g + 1) / static_cast<double>(grid));
  grid = fit.r.size();
  fit.psi.assign(grid, -std::numeric_limits<double>::infinity());

  // Anchor points x and unit directions e; for d = 1 a dense line scan.
  std::vector<std::vector<double>> dirs;
  std::vector<std::vector<double>> anchors;
  if (d == 1) {
    dirs = {{1.0}};
    const std::size_t na = 2001;
    for (std::size_t i = 0; i < na; ++i)
      anchors.push_back({-extent + 2.0 * extent * static_cast<double>(i) / (na - 1)});
  } else {
    SequentialRng rng(NoiseSource(seed, purpose::audit).split(0xF17));
    for (int k = 0; k < 64; ++k) {
      std::vector<double> e(d);
      double s = 0.0;
      for (double& v : e) {
        v = rng.normal();
        s += v * v;
      }
      for (double& v : e) v /= std::sqrt(s);
      dirs.push_back(e);
    }
    for (int k = 0; k < 500; ++k) {
      std::vector<double> x(d);
      for (double& v : x) v = -extent + 2.0 * extent * rng.uniform();
      anchors.push_back(x);
    }
  }

  std::vector<double> y(d), bx(d), by(d);
  for (std::size_t g = 0; g < grid; ++g) {
    const double r = fit.r[g];
    for (const auto& e : dirs) {
      for (const auto& x0 : anchors) {
        // Centre the pair on the anchor so both points stay in the box when possible.
        std::vector<double> x(d);
        for (int k = 0; k < d; ++k) {
          x[k] = x0[k] - 0.5 * r * e[k];
          y[k] = x0[k] + 0.5 * r * e[k];
        }
        model.b0(x.data(), bx.data());
        model.b0(y.data(), by.data());
        double s = 0.0;
        for (int k = 0; k < d; ++k) s += (x[k] - y[k]) * (bx[k] - by[k]);
        fit.psi[g] = std::max(fit.psi[g], s / r);
      }
    }
  }

  double K1 = 0.0;
  for (std::size_t g = 0; g < grid; ++g) K1 = std::max(K1, fit.psi[g] / fit.r[g]);
  K1 *= 1.0 + 1e-6;
  fit.K1 = K1;

  auto dominates = [&](double R) {
    const auto prof = DissipativityProfile::piecewise(K1, K2, R);
    for (std::size_t g = 0; g < grid; ++g)
      if (prof(fit.r[g]) < fit.psi[g] - 1e-12 * (1.0 + std::abs(fit.psi[g]))) return false;
    return true;
  };
  double hi = rmax;
  if (!dominates(hi)) throw DomainError("fit_dissipativity: no R <= extent dominates the drift");
  double lo = 1e-9;
  if (dominates(lo)) {
    hi = lo;
  } else {
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (dominates(mid) ? hi : lo) = mid;
    }
  }
  // Small margin for the gaps between grid radii.
  fit.R = hi * (1.0 + 1e-3);
  return fit;
}

}  // namespace chaoskit
