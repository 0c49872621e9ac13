#include "chaoskit/gradient.hpp"

#include <algorithm>
#include <cmath>

#include "chaoskit/error.hpp"
#include "chaoskit/numeric.hpp"
#include "chaoskit/sde.hpp"

namespace chaoskit {

TestFunction clipped_coordinate(int k, double clip) {
  return {"clipped_coordinate_" + std::to_string(k),
          [k, clip](const double* x) { return std::clamp(x[k], -clip, clip); }};
}

TestFunction smoothed_distance(std::vector<double> c, double eps) {
  return {"smoothed_distance", [c = std::move(c), eps](const double* x) {
            double s = 0.0;
            for (std::size_t k = 0; k < c.size(); ++k) s += (x[k] - c[k]) * (x[k] - c[k]);
            return std::sqrt(s + eps * eps) - eps;
          }};
}

namespace {

struct Samples {
  std::vector<double> v;  // per MC path
};

// End points at time t of mc paths started at z at time s.
std::vector<double> endpoints(const ModelSpec& model, const MeasureFlow& flow, double s, double t,
                              const std::vector<double>& z, std::size_t mc, double dt,
                              std::uint64_t seed) {
  SimConfig cfg;
  cfg.dt = dt;
  cfg.T = t - s;
  cfg.seed = seed;
  cfg.record_every = std::max<std::size_t>(1, cfg.steps());
  const int d = model.d;
  std::vector<double> start(mc * d);
  for (std::size_t p = 0; p < mc; ++p) std::copy(z.begin(), z.end(), start.begin() + p * d);
  auto tr = simulate_decoupled(model, flow, s, start, mc, cfg);
  return tr.states.back();
}

}  // namespace

GradientEstimate estimate_cG(const ModelSpec& model, const MeasureFlow& flow,
                             const std::vector<TestFunction>& tests, const GradientOptions& opt) {
  if (tests.empty()) throw DomainError("estimate_cG: no test functions");
  if (opt.st.empty() || opt.z_grid.empty()) throw DomainError("estimate_cG: empty (s,t) or z grid");
  if (!(opt.h > 0.0)) throw DomainError("estimate_cG: h must be > 0");
  if (opt.mc < 2) throw DomainError("estimate_cG: mc must be >= 2");
  if (!(opt.eta > 0.0 && opt.eta <= 1.0)) throw DomainError("estimate_cG: eta must be in (0, 1]");
  const int d = model.d;
  GradientEstimate best;
  best.cG = -1.0;

  for (const auto& [s, t] : opt.st) {
    if (!(t > s)) throw DomainError("estimate_cG: need t > s");
    const double tau = std::min(t - s, 1.0);
    for (const auto& z : opt.z_grid) {
      if (z.size() != static_cast<std::size_t>(d)) throw DomainError("estimate_cG: z must be in R^d");
      // Shared seed: every shifted start sees the same noise paths.
      const auto base = endpoints(model, flow, s, t, z, opt.mc, opt.dt, opt.seed);
      std::vector<std::vector<double>> plus(d), minus(d);
      for (int k = 0; k < d; ++k) {
        auto zp = z, zm = z;
        zp[k] += opt.h;
        zm[k] -= opt.h;
        plus[k] = endpoints(model, flow, s, t, zp, opt.mc, opt.dt, opt.seed);
        minus[k] = endpoints(model, flow, s, t, zm, opt.mc, opt.dt, opt.seed);
      }
      for (const auto& tf : tests) {
        for (int order : opt.orders) {
          if (order != 1 && order != 2) throw DomainError("estimate_cG: order must be 1 or 2");
          // Per-direction estimates; the gradient norm (order 1) or the largest
          // diagonal second derivative (order 2).
          double norm2v = 0.0, var_sum = 0.0, worst_diag = 0.0, worst_var = 0.0;
          for (int k = 0; k < d; ++k) {
            std::vector<double> q(opt.mc);
            for (std::size_t p = 0; p < opt.mc; ++p) {
              const double fp = tf.f(plus[k].data() + p * d);
              const double fm = tf.f(minus[k].data() + p * d);
              q[p] = order == 1 ? (fp - fm) / (2.0 * opt.h)
                                : (fp - 2.0 * tf.f(base.data() + p * d) + fm) / (opt.h * opt.h);
            }
            const double mean = compensated_mean(q);
            CompensatedSum v;
            for (double e : q) v.add((e - mean) * (e - mean));
            const double var_mean = v.value() / (opt.mc - 1) / opt.mc;
            if (order == 1) {
              norm2v += mean * mean;
              var_sum += var_mean;
            } else if (std::abs(mean) >= worst_diag) {
              worst_diag = std::abs(mean);
              worst_var = var_mean;
            }
          }
          const double est = order == 1 ? std::sqrt(norm2v) : worst_diag;
          const double se = std::sqrt(order == 1 ? var_sum : worst_var);
          const double w = std::pow(tau, 0.5 * (order - opt.eta));
          if (est * w > best.cG) {
            best.cG = est * w;
            best.stderr = se * w;
            best.s = s;
            best.t = t;
            best.z = z;
            best.function = tf.name;
            best.order = order;
          }
          if (se > std::max(est, 1e-12) && se > 0.1) {
            best.ill_conditioned = true;
            best.recommended_h = std::max(best.recommended_h, 2.0 * opt.h);
          }
        }
      }
    }
  }
  if (best.ill_conditioned)
    best.warning = "finite-difference noise dominates; try h = " + std::to_string(best.recommended_h);
  return best;
}

}  // namespace chaoskit
