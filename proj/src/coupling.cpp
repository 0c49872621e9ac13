#include "chaoskit/coupling.hpp"

#include <algorithm>
#include <cmath>

#include "chaoskit/error.hpp"
#include "chaoskit/kernels.hpp"
#include "chaoskit/numeric.hpp"

namespace chaoskit {

CouplingMode parse_coupling_mode(const std::string& name) {
  if (name == "maximal_reflection") return CouplingMode::maximal_reflection;
  if (name == "threshold") return CouplingMode::threshold;
  if (name == "smoothed") return CouplingMode::smoothed;
  if (name == "synchronous") return CouplingMode::synchronous;
  throw DomainError("unknown coupling mode '" + name + "'");
}

std::string to_string(CouplingMode mode) {
  switch (mode) {
    case CouplingMode::maximal_reflection: return "maximal_reflection";
    case CouplingMode::threshold: return "threshold";
    case CouplingMode::smoothed: return "smoothed";
    case CouplingMode::synchronous: return "synchronous";
  }
  return "?";
}

void reflect(const double* e, const double* xi, int d, double* out) {
  const double p = dot(e, xi, d);
  for (int k = 0; k < d; ++k) out[k] = xi[k] - 2.0 * p * e[k];
}

bool maximal_reflection_step(const double* m1, const double* m2, double s, const double* xi,
                             double u, int d, double* x1, double* x2) {
  double z2 = 0.0;
  for (int k = 0; k < d; ++k) {
    const double z = (m1[k] - m2[k]) / s;
    z2 += z * z;
  }
  for (int k = 0; k < d; ++k) x1[k] = m1[k] + s * xi[k];
  if (z2 == 0.0) {
    for (int k = 0; k < d; ++k) x2[k] = x1[k];
    return true;
  }
  // Accept the merge with probability min(1, phi(xi + z) / phi(xi)).
  double log_ratio = 0.0;
  for (int k = 0; k < d; ++k) {
    const double z = (m1[k] - m2[k]) / s;
    log_ratio += -0.5 * (xi[k] + z) * (xi[k] + z) + 0.5 * xi[k] * xi[k];
  }
  if (std::log(u) <= log_ratio) {
    for (int k = 0; k < d; ++k) x2[k] = x1[k];
    return true;
  }
  const double zn = std::sqrt(z2);
  double p = 0.0;
  for (int k = 0; k < d; ++k) p += (m1[k] - m2[k]) / s / zn * xi[k];
  for (int k = 0; k < d; ++k) {
    const double e = (m1[k] - m2[k]) / s / zn;
    x2[k] = m2[k] + s * (xi[k] - 2.0 * p * e);
  }
  return false;
}

namespace {

void check_reflection(const double* e, int d) {
  // (I - 2ee^T) must be orthogonal and an involution.
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double prod = 0.0;
      for (int k = 0; k < d; ++k) {
        const double a = (i == k ? 1.0 : 0.0) - 2.0 * e[i] * e[k];
        const double b = (k == j ? 1.0 : 0.0) - 2.0 * e[k] * e[j];
        prod += a * b;
      }
      if (std::abs(prod - (i == j ? 1.0 : 0.0)) > 1e-12)
        throw NumericError("coupling: reflection matrix is not orthogonal");
    }
}

}  // namespace

CouplingTrace simulate_reflection_coupling(const ModelSpec& model, const MeasureFlow& flow,
                                           std::span<const double> x0, std::span<const double> y0,
                                           std::size_t M, const SimConfig& cfg,
                                           const CouplingOptions& opt, const FFunction& f) {
  cfg.validate();
  flow.validate();
  const int d = model.d, n = model.n;
  if (x0.size() != static_cast<std::size_t>(d) || y0.size() != static_cast<std::size_t>(d))
    throw DomainError("coupling: start points must be in R^d");
  if (M < 1) throw DomainError("coupling: M must be >= 1");
  if (opt.mode == CouplingMode::smoothed && !(opt.epsilon > 0.0))
    throw DomainError("coupling: smoothed mode needs epsilon > 0");

  const std::size_t steps = cfg.steps();
  const double t0 = flow.times.front();
  // Past the last grid time the last cloud is reused (piecewise constant);
  // a multi-point grid that ends before the horizon is an error.
  if (flow.times.size() > 1 && steps > 0 &&
      t0 + static_cast<double>(steps - 1) * cfg.dt > flow.times.back() + 1e-9 * (1.0 + flow.times.back()))
    throw DomainError("coupling: horizon exceeds the flow grid");

  const double s = std::sqrt(model.beta * cfg.dt);
  const double sdt = std::sqrt(cfg.dt);
  const double theta = opt.merge_threshold > 0.0 ? opt.merge_threshold
                                                 : 10.0 * std::sqrt(model.beta * cfg.dt * d);
  const NoiseSource src(cfg.seed, purpose::coupling);

  std::vector<double> pts(2 * M * d);
  for (std::size_t m = 0; m < M; ++m)
    for (int k = 0; k < d; ++k) {
      pts[m * d + k] = x0[k];
      pts[(M + m) * d + k] = y0[k];
    }
  std::vector<double> drift(2 * M * d), diff(2 * M * d * n);
  std::vector<char> merged(M, 0);

  CouplingTrace tr;
  tr.M = M;
  tr.d = d;
  tr.merge_threshold = theta;
  tr.mode = opt.mode;
  tr.tau.assign(M, std::numeric_limits<double>::infinity());

  std::vector<double> tanaka_step(M, 0.0);
  auto record = [&](double t) {
    std::vector<double> fz(M), z(M);
    std::size_t nm = 0;
    for (std::size_t m = 0; m < M; ++m) {
      z[m] = std::sqrt(dist2(pts.data() + m * d, pts.data() + (M + m) * d, d));
      fz[m] = z[m] == 0.0 ? 0.0 : f.value(z[m]);
      if (merged[m]) ++nm;
    }
    CompensatedSum s1, s2, sz, st;
    for (std::size_t m = 0; m < M; ++m) {
      s1.add(fz[m]);
      sz.add(z[m]);
      st.add(tanaka_step[m]);
    }
    const double mean = s1.value() / M;
    for (std::size_t m = 0; m < M; ++m) s2.add((fz[m] - mean) * (fz[m] - mean));
    tr.times.push_back(t);
    tr.mean_fZ.push_back(mean);
    tr.stderr_fZ.push_back(M > 1 ? std::sqrt(s2.value() / (M - 1) / M) : 0.0);
    tr.mean_Z.push_back(sz.value() / M);
    tr.frac_merged.push_back(static_cast<double>(nm) / M);
    tr.tanaka.push_back(st.value() / M);
    tr.leg1.emplace_back(pts.begin(), pts.begin() + M * d);
    tr.leg2.emplace_back(pts.begin() + M * d, pts.end());
  };

  for (std::size_t m = 0; m < M; ++m)
    if (dist2(x0.data(), y0.data(), d) == 0.0) {
      merged[m] = 1;
      tr.tau[m] = t0;
    }
  record(t0);

  bool fail = false;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = t0 + static_cast<double>(k) * cfg.dt;
    const auto& cloud = flow.at(t);
    flow_fields(model, pts, 2 * M, cloud.states, cloud.N, drift, diff, cfg.exec);
#pragma omp parallel for schedule(static)
    for (std::size_t m = 0; m < M; ++m) {
      const auto rm = static_cast<std::uint32_t>(m);
      std::vector<double> xi(d), xt(d), dB(n), m1(d), m2(d), e(d), rx(d);
      src.normals(Channel::W, rm, 0, k, xi);
      src.normals(Channel::B, rm, 0, k, dB);
      for (double& v : dB) v *= sdt;
      double* p1 = pts.data() + m * d;
      double* p2 = pts.data() + (M + m) * d;
      const double* s1 = diff.data() + m * d * n;
      const double* s2 = diff.data() + (M + m) * d * n;
      for (int c = 0; c < d; ++c) {
        double a = p1[c] + drift[m * d + c] * cfg.dt;
        double b = p2[c] + drift[(M + m) * d + c] * cfg.dt;
        for (int l = 0; l < n; ++l) {
          a += s1[c * n + l] * dB[l];
          b += s2[c * n + l] * dB[l];
        }
        m1[c] = a;
        m2[c] = b;
      }
      const double zprev = std::sqrt(dist2(p1, p2, d));
      switch (opt.mode) {
        case CouplingMode::synchronous:
          for (int c = 0; c < d; ++c) {
            p1[c] = m1[c] + s * xi[c];
            p2[c] = m2[c] + s * xi[c];
          }
          break;
        case CouplingMode::maximal_reflection: {
          const double u = src.uniform(Channel::Coupling, rm, 0, k);
          if (maximal_reflection_step(m1.data(), m2.data(), s, xi.data(), u, d, p1, p2) && !merged[m]) {
            merged[m] = 1;
            tr.tau[m] = t + cfg.dt;
          }
          break;
        }
        case CouplingMode::threshold: {
          if (merged[m] || zprev == 0.0) {
            for (int c = 0; c < d; ++c) p1[c] = p2[c] = m1[c] + s * xi[c];
            break;
          }
          for (int c = 0; c < d; ++c) e[c] = (p1[c] - p2[c]) / zprev;
          if (opt.debug) check_reflection(e.data(), d);
          reflect(e.data(), xi.data(), d, rx.data());
          for (int c = 0; c < d; ++c) {
            p1[c] = m1[c] + s * xi[c];
            p2[c] = m2[c] + s * rx[c];
          }
          if (std::sqrt(dist2(p1, p2, d)) <= theta) {
            for (int c = 0; c < d; ++c) p2[c] = p1[c];
            merged[m] = 1;
            tr.tau[m] = t + cfg.dt;
          }
          break;
        }
        case CouplingMode::smoothed: {
          src.normals(Channel::WTilde, rm, 0, k, xt);
          const double pr = std::clamp(2.0 * zprev / opt.epsilon - 1.0, 0.0, 1.0);
          const double ps = std::sqrt(1.0 - pr * pr);
          if (zprev > 0.0) {
            for (int c = 0; c < d; ++c) e[c] = (p1[c] - p2[c]) / zprev;
            if (opt.debug) check_reflection(e.data(), d);
            reflect(e.data(), xi.data(), d, rx.data());
          } else {
            rx = xi;
          }
          double hs = 0.0;
          for (int c = 0; c < d * n; ++c) hs += (s1[c] - s2[c]) * (s1[c] - s2[c]);
          tanaka_step[m] = zprev > 0.0 ? 0.5 * hs / zprev : 0.0;
          for (int c = 0; c < d; ++c) {
            p1[c] = m1[c] + s * (pr * xi[c] + ps * xt[c]);
            p2[c] = m2[c] + s * (pr * rx[c] + ps * xt[c]);
          }
          break;
        }
      }
      for (int c = 0; c < d; ++c)
        if (!std::isfinite(p1[c]) || !std::isfinite(p2[c])) {
#pragma omp atomic write
          fail = true;
        }
    }
    if (fail) throw NumericError("coupling blew up at step " + std::to_string(k + 1), k + 1);
    if ((k + 1) % cfg.record_every == 0 || k + 1 == steps) record(t + cfg.dt);
  }
  return tr;
}

void simulate_chaos_coupling(const ModelSpec& model, const MeasureFlow& flow,
                             std::span<const double> init, std::span<const double> twin_init,
                             std::size_t R, std::size_t N, const SimConfig& cfg,
                             CouplingMode mode, const ChaosVisitor& visit) {
  cfg.validate();
  flow.validate();
  if (mode != CouplingMode::synchronous && mode != CouplingMode::maximal_reflection)
    throw DomainError("chaos coupling supports synchronous and maximal_reflection only");
  const int d = model.d, n = model.n;
  const std::size_t rows = R * N;
  if (init.size() != rows * d || twin_init.size() != rows * d)
    throw DomainError("chaos coupling: initial blocks have the wrong size");
  const std::size_t steps = cfg.steps();
  const NoiseSource src(cfg.seed, purpose::particle_system);
  const NoiseSource coin(cfg.seed, purpose::coupling);
  const double sdt = std::sqrt(cfg.dt);
  const double sb = std::sqrt(model.beta);
  const double s = sb * sdt;

  std::vector<double> x(init.begin(), init.end()), xb(twin_init.begin(), twin_init.end());
  std::vector<std::uint32_t> order(rows);
  std::vector<double> drift(rows * d), diff(rows * d * n), drift_b(rows * d), diff_b(rows * d * n);

  std::size_t rec = 0;
  visit(rec++, 0.0, x, xb);
  bool fail = false;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
#pragma omp parallel for schedule(static)
    for (std::size_t r = 0; r < R; ++r)
      canonical_order({x.data() + r * N * d, N * d}, N, d, order.data() + r * N);
    system_fields(model, x, R, N, order, drift, diff, cfg.exec);
    const auto& cloud = flow.at(t);
    flow_fields(model, xb, rows, cloud.states, cloud.N, drift_b, diff_b, cfg.exec);
#pragma omp parallel for schedule(static)
    for (std::size_t row = 0; row < rows; ++row) {
      const auto r = static_cast<std::uint32_t>(row / N);
      const auto i = static_cast<std::uint32_t>(row % N);
      std::vector<double> xi(d), dB(n), m1(d), m2(d);
      src.normals(Channel::W, r, i, k, xi);
      src.normals(Channel::B, r, i, k, dB);
      for (double& v : dB) v *= sdt;
      double* p = x.data() + row * d;
      double* q = xb.data() + row * d;
      const double* sp = diff.data() + row * d * n;
      const double* sq = diff_b.data() + row * d * n;
      for (int c = 0; c < d; ++c) {
        // Same operation order as the plain Euler-Maruyama update.
        double a = p[c] + drift[row * d + c] * cfg.dt + sb * (xi[c] * sdt);
        for (int l = 0; l < n; ++l) a += sp[c * n + l] * dB[l];
        double b = q[c] + drift_b[row * d + c] * cfg.dt;
        for (int l = 0; l < n; ++l) b += sq[c * n + l] * dB[l];
        m2[c] = b;
        m1[c] = a;  // particle's new state
      }
      if (mode == CouplingMode::synchronous) {
        for (int c = 0; c < d; ++c) q[c] = m2[c] + sb * (xi[c] * sdt);
      } else {
        // Couple the twin's W with the particle's: the particle mean is its
        // new state minus the W contribution.
        std::vector<double> mean1(d), leg(d);
        for (int c = 0; c < d; ++c) mean1[c] = m1[c] - sb * (xi[c] * sdt);
        const double u = coin.uniform(Channel::Coupling, r, i, k);
        // On a merge the twin takes the particle's exact new state.
        if (maximal_reflection_step(mean1.data(), m2.data(), s, xi.data(), u, d, leg.data(), q))
          for (int c = 0; c < d; ++c) q[c] = m1[c];
      }
      for (int c = 0; c < d; ++c) {
        p[c] = m1[c];
        if (!std::isfinite(p[c]) || !std::isfinite(q[c])) {
#pragma omp atomic write
          fail = true;
        }
      }
    }
    if (fail) throw NumericError("simulation blew up at step " + std::to_string(k + 1), k + 1);
    if ((k + 1) % cfg.record_every == 0 || k + 1 == steps)
      visit(rec++, static_cast<double>(k + 1) * cfg.dt, x, xb);
  }
}

}  // namespace chaoskit
