#include <algorithm>
#include <cmath>
#include <string>

#include "chaoskit/analysis.hpp"
#include "chaoskit/error.hpp"
#include "chaoskit/numeric.hpp"

namespace chaoskit {

void GronwallInput::validate() const {
  if (!(theta > 0.0)) throw DomainError("gronwall: theta must be > 0");
  if (!(C >= 0.0) || !std::isfinite(C)) throw DomainError("gronwall: C must be >= 0");
  if (a.size() < 2) throw DomainError("gronwall: a needs at least two grid samples");
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("gronwall: T must be > 0");
  for (double v : a)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw DomainError("gronwall: a must be finite and nonnegative");
  if (!(tol > 0.0)) throw DomainError("gronwall: tol must be > 0");
}

namespace {

// coef * int_{s_j}^{s_{j+1}} (t - s)^{alpha - 1} a(s) ds with a linear on the
// panel; u = t - s runs over [L, U]. log_coef already holds log of coef.
double panel(double log_coef, double alpha, double L, double U, double aj, double aj1, double h) {
  const double lnU = std::log(U);
  const double lr = L > 0.0 ? std::log(L / U) : -INFINITY;
  // coef (U^alpha - L^alpha) / alpha and coef (U^{alpha+1} - L^{alpha+1}) / (alpha + 1)
  const double A = std::exp(log_coef + alpha * lnU - std::log(alpha)) * -std::expm1(alpha * lr);
  const double slope = aj - aj1;
  if (slope == 0.0) return aj1 * A;
  const double B = std::exp(log_coef + (alpha + 1.0) * lnU - std::log(alpha + 1.0)) *
                   -std::expm1((alpha + 1.0) * lr);
  return aj1 * A + slope / h * (B - L * A);
}

}  // namespace

GronwallResult gronwall_bound(const GronwallInput& in) {
  in.validate();
  const std::size_t K = in.a.size() - 1;
  const double h = in.T / static_cast<double>(K);
  GronwallResult out;
  out.t.resize(K + 1);
  for (std::size_t k = 0; k <= K; ++k) out.t[k] = h * static_cast<double>(k);
  out.bound = in.a;
  if (in.C == 0.0) return out;

  std::vector<CompensatedSum> acc(K + 1);
  for (std::size_t k = 0; k <= K; ++k) acc[k].add(in.a[k]);
  const double log_base = std::log(in.C) + std::lgamma(in.theta);
  double prev_sup = INFINITY;
  double sup_bound = *std::max_element(in.a.begin(), in.a.end());
  out.converged = false;
  std::vector<double> term(K + 1);

  for (std::size_t n = 1; n <= in.max_terms; ++n) {
    const double alpha = static_cast<double>(n) * in.theta;
    const double log_coef = static_cast<double>(n) * log_base - std::lgamma(alpha);
#pragma omp parallel for schedule(dynamic, 16)
    for (std::size_t m = 1; m <= K; ++m) {
      CompensatedSum s;
      const double tm = out.t[m];
      for (std::size_t j = 0; j < m; ++j) {
        const double L = tm - out.t[j + 1], U = tm - out.t[j];
        s.add(panel(log_coef, alpha, std::max(L, 0.0), U, in.a[j], in.a[j + 1], h));
      }
      term[m] = s.value();
    }
    term[0] = 0.0;
    double sup = 0.0;
    for (std::size_t m = 0; m <= K; ++m) {
      if (!std::isfinite(term[m]))
        throw NumericError("gronwall: series overflow at term " + std::to_string(n), n);
      acc[m].add(term[m]);
      sup = std::max(sup, term[m]);
      sup_bound = std::max(sup_bound, acc[m].value());
    }
    out.terms = n;
    if (sup <= in.tol * sup_bound && sup <= prev_sup) {
      out.converged = true;
      break;
    }
    prev_sup = sup;
  }
  for (std::size_t k = 0; k <= K; ++k) out.bound[k] = acc[k].value();
  return out;
}

}  // namespace chaoskit
