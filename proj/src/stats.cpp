#include "chaoskit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/students_t.hpp>

#include "chaoskit/error.hpp"
#include "chaoskit/numeric.hpp"

namespace chaoskit {

RateFit fit_rate(std::span<const double> x, std::span<const double> y, FitScale scale,
                 double confidence) {
  if (x.size() != y.size()) throw DomainError("fit_rate: x and y differ in length");
  if (x.size() < 3) throw DomainError("fit_rate: need at least 3 points");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw DomainError("fit_rate: confidence must lie in (0, 1)");
  const std::size_t n = x.size();
  std::vector<double> u(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(y[i] > 0.0)) throw DomainError("fit_rate: y must be positive");
    if (scale == FitScale::loglog && !(x[i] > 0.0))
      throw DomainError("fit_rate: x must be positive on a log-log fit");
    u[i] = scale == FitScale::loglog ? std::log(x[i]) : x[i];
    w[i] = std::log(y[i]);
  }
  const double ub = compensated_mean(u), wb = compensated_mean(w);
  CompensatedSum sxx, sxy, syy;
  for (std::size_t i = 0; i < n; ++i) {
    sxx.add((u[i] - ub) * (u[i] - ub));
    sxy.add((u[i] - ub) * (w[i] - wb));
    syy.add((w[i] - wb) * (w[i] - wb));
  }
  if (!(sxx.value() > 0.0)) throw DomainError("fit_rate: x values are all equal");
  RateFit fit;
  fit.n = n;
  fit.slope = sxy.value() / sxx.value();
  fit.intercept = wb - fit.slope * ub;
  CompensatedSum sse;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = w[i] - fit.intercept - fit.slope * u[i];
    sse.add(e * e);
  }
  fit.r2 = syy.value() > 0.0 ? 1.0 - sse.value() / syy.value() : 1.0;
  fit.r2 = std::clamp(fit.r2, 0.0, 1.0);
  const double s2 = sse.value() / static_cast<double>(n - 2);
  const boost::math::students_t dist(static_cast<double>(n - 2));
  const double q = boost::math::quantile(dist, 0.5 + 0.5 * confidence);
  fit.halfwidth = q * std::sqrt(s2 / sxx.value());
  return fit;
}

MeanSE mean_se(std::span<const double> v) {
  MeanSE r;
  if (v.empty()) return r;
  r.mean = compensated_mean(v);
  if (v.size() < 2) return r;
  CompensatedSum s;
  for (double x : v) s.add((x - r.mean) * (x - r.mean));
  r.se = std::sqrt(s.value() / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  return r;
}

double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  constexpr double pi = std::numbers::pi;
  if (lambda < 1.18) {
    // Jacobi-transformed series, fast for small lambda.
    const double y = std::exp(-pi * pi / (8.0 * lambda * lambda));
    double s = 0.0;
    for (int j = 1; j <= 9; j += 2) s += std::pow(y, j * j);
    return std::clamp(1.0 - std::sqrt(2.0 * pi) / lambda * s, 0.0, 1.0);
  }
  double s = 0.0, sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    s += sign * term;
    sign = -sign;
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

KSResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double D = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    D = std::max(D, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double en = std::sqrt(na * nb / (na + nb));
  return {D, kolmogorov_q((en + 0.12 + 0.11 / en) * D)};
}

double median(std::vector<double> v) {
  if (v.empty()) throw DomainError("median: empty input");
  const std::size_t h = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + h, v.end());
  if (v.size() % 2 == 1) return v[h];
  const double hi = v[h];
  return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + h));
}

}  // namespace chaoskit
