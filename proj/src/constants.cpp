#include "chaoskit/constants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "chaoskit/error.hpp"
#include "chaoskit/numeric.hpp"
#include "chaoskit/quadrature.hpp"

namespace chaoskit {

namespace {

constexpr std::size_t kPotentialPanels = 4096;
constexpr double kQuadRelTol = 1e-13;

double piecewise_phi(double K1, double K2, double R, double s) {
  if (s <= R) return 0.5 * K1 * s * s;
  const double A = (K1 + K2) / R;
  const double s2R = std::min(s, 2.0 * R);
  const double mid = -A * (s2R * s2R * s2R - R * R * R) / 3.0 + 0.5 * (A * R + K1) * (s2R * s2R - R * R);
  const double base = 0.5 * K1 * R * R + mid;
  if (s <= 2.0 * R) return base;
  return base - 0.5 * K2 * (s * s - 4.0 * R * R);
}

void require_tail(const DissipativityProfile& profile) {
  if (!(profile.K2() > 0.0))
    throw DivergenceError("profile tail slope K2 must be > 0 for the delta integral to converge");
}

// Checks gamma(v) <= -K2 v beyond the declared radius on a sample of points.
void check_override_tail(const DissipativityProfile& profile, double beta) {
  const double K2 = profile.K2();
  const double r0 = profile.tail_start();
  const double span = 60.0 * std::sqrt(beta / K2) + 10.0 + r0;
  for (int i = 0; i <= 400; ++i) {
    const double v = r0 + span * i / 400.0;
    const double g = profile(v);
    if (!(g <= -K2 * v + 1e-12 * (1.0 + K2 * v)))
      throw DivergenceError("override profile violates gamma(v) <= -K2 v beyond the declared radius");
  }
}

}  // namespace

Potential::Potential(const DissipativityProfile& profile, double radius)
    : profile_(profile), radius_(radius) {
  if (profile_.kind() == DissipativityProfile::Kind::piecewise) return;
  if (!(radius_ > 0.0)) radius_ = 1.0;
  h_ = radius_ / kPotentialPanels;
  cum_.resize(kPotentialPanels + 1);
  cum_[0] = 0.0;
  auto g = [this](double v) { return profile_(v); };
  CompensatedSum acc;
  for (std::size_t k = 1; k <= kPotentialPanels; ++k) {
    acc.add(gauss_kronrod_panel(g, (k - 1) * h_, k * h_).value);
    cum_[k] = acc.value();
  }
}

double Potential::operator()(double s) const {
  if (profile_.kind() == DissipativityProfile::Kind::piecewise)
    return piecewise_phi(profile_.K1(), profile_.K2(), profile_.R(), s);
  if (s >= radius_) return cum_.back() - 0.5 * profile_.K2() * (s * s - radius_ * radius_);
  const auto k = static_cast<std::size_t>(s / h_);
  const double left = k * h_;
  if (s == left) return cum_[k];
  auto g = [this](double v) { return profile_(v); };
  return cum_[k] + gauss_kronrod_panel(g, left, s).value;
}

namespace {

struct DeltaSetup {
  Potential phi;
  double shift;       // max of Phi on the integration range
  double cut;         // numerical range [0, cut]
  DeltaResult result;
};

DeltaSetup delta_impl(const DissipativityProfile& profile, double beta) {
  if (!(beta > 0.0)) throw DomainError("compute_delta: beta must be > 0");
  require_tail(profile);
  const double K2 = profile.K2();
  const bool piecewise = profile.kind() == DissipativityProfile::Kind::piecewise;
  if (!piecewise) check_override_tail(profile, beta);

  const double rt = profile.tail_start();
  Potential pre(profile, std::max(rt, 1.0));
  double shift = 0.0;
  for (int i = 0; i <= 2000; ++i) shift = std::max(shift, pre(rt * i / 2000.0));

  // Truncation: beyond `cut` the integrand is below exp(-L) relative to its
  // peak scale; the remainder is added in closed form (exact when gamma is
  // exactly -K2 v there).
  double L = piecewise ? 0.0 : 45.0;
  for (int attempt = 0;; ++attempt) {
    const double cut =
        piecewise ? 2.0 * profile.R()
                  : std::sqrt(rt * rt + 2.0 * (pre(rt) - shift + 2.0 * beta * L) / K2);
    Potential phi = piecewise ? pre : Potential(profile, cut);
    auto integrand = [&](double s) { return s * std::exp((phi(s) - shift) / (2.0 * beta)); };

    std::vector<double> breaks = {0.0};
    if (piecewise) {
      breaks.push_back(profile.R());
      breaks.push_back(2.0 * profile.R());
    } else {
      if (rt > 0.0 && rt < cut) breaks.push_back(rt);
      breaks.push_back(cut);
    }
    CompensatedSum sum;
    double err = 0.0;
    std::size_t evals = 0;
    for (std::size_t i = 1; i < breaks.size(); ++i) {
      auto q = integrate(integrand, breaks[i - 1], breaks[i], kQuadRelTol);
      sum.add(q.value);
      err += q.error;
      evals += q.evaluations;
    }
    const double tail = std::exp((phi(cut) - shift) / (2.0 * beta)) * 2.0 * beta / K2;
    sum.add(tail);
    if (!piecewise) err += tail;  // only an upper bound for overrides

    const double scaled = sum.value();
    if (!piecewise && tail > 1e-13 * scaled && attempt < 6) {
      L += 20.0;
      continue;
    }
    const double scale = std::exp(shift / (2.0 * beta));
    if (!std::isfinite(scale) || !std::isfinite(scaled))
      throw NumericError("compute_delta: delta overflows double precision");
    DeltaResult r;
    r.delta = scaled * scale;
    r.error = err * scale;
    r.truncation_radius = cut;
    r.tail_closed_form = piecewise;
    r.evaluations = evals;
    return {std::move(phi), shift, cut, r};
  }
}

}  // namespace

DeltaResult compute_delta(const DissipativityProfile& profile, double beta) {
  return delta_impl(profile, beta).result;
}

ContractionConstants make_constants(double delta, double beta, double K2, double Kb,
                                    double Ksigma) {
  if (!(delta > 0.0)) throw DomainError("constants: delta must be > 0");
  if (!(beta > 0.0)) throw DomainError("constants: beta must be > 0");
  if (!(K2 > 0.0)) throw DomainError("constants: K2 must be > 0");
  ContractionConstants c;
  c.beta = beta;
  c.K2 = K2;
  c.Kb = Kb;
  c.Ksigma = Ksigma;
  c.delta = delta;
  c.c_E = K2 * delta / (2.0 * beta);
  c.lambda0 = 2.0 * beta / delta - c.c_E * (Kb + Ksigma);
  return c;
}

ContractionConstants contraction_constants(const ModelSpec& model,
                                           const DissipativityProfile& profile) {
  const auto q = compute_delta(profile, model.beta);
  auto c = make_constants(q.delta, model.beta, profile.K2(), model.constants.Kb,
                          model.constants.Ksigma);
  c.quadrature = q;
  return c;
}

FFunction::FFunction(const DissipativityProfile& profile, double beta, std::size_t table_nodes)
    : profile_(profile), beta_(beta), K2_(profile.K2()), phi_(profile, 1.0) {
  if (table_nodes < 3) throw DomainError("FFunction: need at least 3 table nodes");
  auto setup = delta_impl(profile, beta);
  delta_ = setup.result.delta;
  phi_ = std::move(setup.phi);
  const bool piecewise = profile.kind() == DissipativityProfile::Kind::piecewise;
  r_tail_ = piecewise ? 2.0 * profile.R() : profile.tail_start();
  r_trunc_ = setup.cut;
  r_tab_ = piecewise ? 2.0 * profile.R() : std::max(setup.cut, 1e-3);
  if ((table_nodes - 1) % 2) ++table_nodes;  // keep R on a node
  h_ = r_tab_ / static_cast<double>(table_nodes - 1);
  f_.assign(table_nodes, 0.0);
  df_.assign(table_nodes, 0.0);
  auto fp = [this](double u) { return derivative(u); };
  for (std::size_t k = 0; k < table_nodes; ++k) {
    df_[k] = derivative(k * h_);
    if (k > 0) f_[k] = f_[k - 1] + gauss_kronrod_panel(fp, (k - 1) * h_, k * h_).value;
  }
}

double FFunction::derivative(double r) const {
  if (!(r >= 0.0)) throw DomainError("f: r must be >= 0");
  const bool piecewise = profile_.kind() == DissipativityProfile::Kind::piecewise;
  if (piecewise && r >= r_tail_) return 2.0 * beta_ / K2_;
  const double base = phi_(r);
  auto integrand = [&](double s) { return s * std::exp((phi_(s) - base) / (2.0 * beta_)); };
  double up;
  std::vector<double> breaks = {r};
  if (piecewise) {
    if (r < profile_.R()) breaks.push_back(profile_.R());
    up = r_tail_;
  } else {
    const double m = std::max(r, r_trunc_);
    up = std::sqrt(m * m + 2.0 * 2.0 * beta_ * 60.0 / K2_);
    if (r < r_tail_) breaks.push_back(r_tail_);
  }
  breaks.push_back(up);
  CompensatedSum sum;
  for (std::size_t i = 1; i < breaks.size(); ++i)
    sum.add(integrate(integrand, breaks[i - 1], breaks[i], kQuadRelTol).value);
  sum.add(std::exp((phi_(up) - base) / (2.0 * beta_)) * 2.0 * beta_ / K2_);
  return sum.value();
}

double FFunction::second(double r) const {
  return -profile_(r) * derivative(r) / (2.0 * beta_) - r;
}

double FFunction::value(double r) const {
  if (!(r >= 0.0)) throw DomainError("f: r must be >= 0");
  if (r >= r_tab_) return f_.back() + df_.back() * (r - r_tab_);
  auto k = static_cast<std::size_t>(r / h_);
  if (k >= f_.size() - 1) k = f_.size() - 2;
  const double t = (r - k * h_) / h_;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * f_[k] + (t3 - 2 * t2 + t) * h_ * df_[k] +
         (-2 * t3 + 3 * t2) * f_[k + 1] + (t3 - t2) * h_ * df_[k + 1];
}

double FFunction::value_exact(double r) const {
  if (!(r >= 0.0)) throw DomainError("f: r must be >= 0");
  auto fp = [this](double u) { return derivative(u); };
  std::vector<double> breaks = {0.0};
  if (profile_.kind() == DissipativityProfile::Kind::piecewise) {
    for (double b : {profile_.R(), 2.0 * profile_.R()})
      if (b < r) breaks.push_back(b);
  } else if (r_tail_ > 0.0 && r_tail_ < r) {
    breaks.push_back(r_tail_);
  }
  breaks.push_back(r);
  CompensatedSum sum;
  for (std::size_t i = 1; i < breaks.size(); ++i)
    sum.add(integrate(fp, breaks[i - 1], breaks[i], 1e-12).value);
  return sum.value();
}

FFunction::Value FFunction::eval(double r) const {
  Value v;
  v.f = value(r);
  v.df = derivative(r);
  v.d2f = -profile_(r) * v.df / (2.0 * beta_) - r;
  return v;
}

FFunction::Value eval_f(const DissipativityProfile& profile, double beta, double r) {
  return FFunction(profile, beta, 257).eval(r);
}

GResult eval_G(double a, double t, double cG, int d, const ContractionConstants& c) {
  if (!(a >= 0.0) || !(t >= 0.0)) throw DomainError("eval_G: a and t must be >= 0");
  if (!(cG > 0.0)) throw DomainError("eval_G: cG must be > 0");
  GResult g;
  const double expo = c.c_E * std::exp(-(2.0 * c.beta / c.delta - c.K2 * c.delta * a / (2.0 * c.beta)) * t);
  const double x = 3.0 * std::numbers::sqrt2 * std::sqrt(static_cast<double>(d)) * cG *
                   std::max(1.0, std::sqrt(t)) * std::sqrt(std::numbers::pi) * std::sqrt(t);
  const double xa = x * a;
  if (xa == 0.0) {
    g.value = expo;
    return g;
  }
  const double log2cE = std::log(2.0 * c.c_E);
  const double lxa = std::log(xa);
  CompensatedSum sum;
  double prev = 0.0;
  int small = 0;
  std::size_t n = 1;
  for (; n <= 10000; ++n) {
    const double lt = log2cE + n * lxa - std::log(static_cast<double>(n)) - std::lgamma(0.5 * n);
    if (lt > 709.0) {
      g.value = std::numeric_limits<double>::infinity();
      g.terms = n;
      return g;
    }
    const double term = std::exp(lt);
    sum.add(term);
    const bool decreasing = n > 1 && term < prev;
    if (decreasing && term < 1e-14 * sum.value()) {
      if (++small == 3) break;
    } else {
      small = 0;
    }
    prev = term;
  }
  g.terms = std::min<std::size_t>(n, 10000);
  g.converged = n <= 10000;
  g.value = sum.value() + expo;
  return g;
}

std::pair<double, double> inf_G_over_t(double a, double cG, int d, const ContractionConstants& c,
                                       const Kappa0Search& search) {
  const double rate = 2.0 * c.beta / c.delta - c.K2 * c.delta * a / (2.0 * c.beta);
  // Exponential part never drops below c_E >= 1 when rate <= 0.
  double t_hi = rate > 0.0 ? std::log(std::max(c.c_E, 1.0) * 1e12) / rate : 1.0;
  t_hi = std::max(t_hi, 10.0 * search.t_lo);
  auto G = [&](double t) { return eval_G(a, t, cG, d, c).value; };

  const std::size_t m = std::max<std::size_t>(search.coarse_t, 8);
  const double l0 = std::log(search.t_lo), l1 = std::log(t_hi);
  std::size_t best = 0;
  double best_v = std::numeric_limits<double>::infinity();
  std::vector<double> vals(m);
  for (std::size_t i = 0; i < m; ++i) {
    vals[i] = G(std::exp(l0 + (l1 - l0) * i / (m - 1)));
    if (vals[i] < best_v) {
      best_v = vals[i];
      best = i;
    }
  }
  // Golden section in log t on the bracket around the best grid point.
  double lo = l0 + (l1 - l0) * (best == 0 ? 0 : best - 1) / (m - 1);
  double hi = l0 + (l1 - l0) * std::min(best + 1, m - 1) / (m - 1);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = G(std::exp(x1)), f2 = G(std::exp(x2));
  for (int it = 0; it < 100 && hi - lo > 1e-12; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = G(std::exp(x1));
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = G(std::exp(x2));
    }
  }
  double t_star = std::exp(best == 0 ? l0 : 0.5 * (lo + hi));
  double v = G(t_star);
  if (best_v < v) {
    v = best_v;
    t_star = std::exp(l0 + (l1 - l0) * best / (m - 1));
  }
  return {v, t_star};
}

Kappa0Result compute_kappa0(double cG, int d, const ContractionConstants& c,
                            const Kappa0Search& search) {
  if (!(cG > 0.0)) throw DomainError("compute_kappa0: cG must be > 0");
  if (c.c_E < 1.0 - 1e-12) throw DomainError("compute_kappa0: c_E must be >= 1");
  Kappa0Result res;
  const double a_max = search.a_max > 0.0 ? search.a_max : c.K2;
  auto feasible = [&](double a) { return inf_G_over_t(a, cG, d, c, search).first < 1.0; };

  const double a_min = a_max * 1e-9;
  if (!feasible(a_min)) {
    res.degenerate = true;
    return res;
  }
  if (feasible(a_max)) {
    res.kappa0 = a_max;
    res.capped = true;
    res.t_star = inf_G_over_t(a_max, cG, d, c, search).second;
    return res;
  }
  double lo = a_min, hi = a_max;
  while (hi - lo > search.a_rel_tol * a_max) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? lo : hi) = mid;
    ++res.iterations;
  }
  res.kappa0 = 0.5 * (lo + hi);
  res.resolution = hi - lo;
  res.t_star = inf_G_over_t(lo, cG, d, c, search).second;
  return res;
}

HypothesisReport check_theorem_hypotheses(const ModelSpec& model,
                                          const DissipativityProfile& profile, double cG, int d) {
  HypothesisReport h;
  h.constants = contraction_constants(model, profile);
  const auto& c = h.constants;
  h.cG = cG;
  h.d = d;
  h.threshold_kbs = 4.0 * c.beta * c.beta / (c.K2 * c.delta * c.delta);
  h.threshold_half_K2 = 0.5 * c.K2;
  h.kappa0 = compute_kappa0(cG, d, c);
  h.lhs = c.Kb + c.Ksigma;
  h.gate_st1 = h.lhs < h.threshold_kbs;
  h.gate_st2 = h.lhs < h.threshold_half_K2;
  h.gate_theorem = h.gate_st1 && h.gate_st2 && h.lhs < h.kappa0.kappa0;
  return h;
}

}  // namespace chaoskit
