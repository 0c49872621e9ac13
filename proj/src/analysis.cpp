#include "chaoskit/analysis.hpp"

#include <cmath>
#include <exception>

#include "chaoskit/error.hpp"
#include "chaoskit/numeric.hpp"
#include "chaoskit/stats.hpp"

namespace chaoskit {

LlnProblem lln_uniform_mean() {
  LlnProblem p;
  p.dim = 1;
  p.h = [](const double*, const double* w) { return w[0]; };
  p.sample = [](SequentialRng& rng, double* out) { out[0] = rng.uniform(); };
  p.integral = [](const double*) { return 0.5; };
  return p;
}

LlnProblem lln_constant(double c) {
  LlnProblem p;
  p.dim = 1;
  p.h = [c](const double*, const double*) { return c; };
  p.sample = [](SequentialRng& rng, double* out) { out[0] = rng.normal(); };
  p.integral = [c](const double*) { return c; };
  return p;
}

std::vector<LlnRow> lln_gap(const LlnProblem& prob, const std::vector<std::size_t>& Ns,
                            std::size_t M, std::uint64_t seed) {
  if (!prob.h || !prob.sample || !prob.integral || prob.dim < 1)
    throw DomainError("lln_gap: incomplete problem");
  if (M < 2) throw DomainError("lln_gap: need at least 2 replicas");
  const NoiseSource root(seed, purpose::lln);
  std::vector<LlnRow> rows;
  for (std::size_t N : Ns) {
    if (N < 1) throw DomainError("lln_gap: N must be >= 1");
    const NoiseSource src = root.split(N);
    std::vector<double> gaps(M);
    const int dim = prob.dim;
    std::exception_ptr err;
#pragma omp parallel for schedule(static)
    for (std::size_t r = 0; r < M; ++r) {
      try {
        SequentialRng rng(src, static_cast<std::uint32_t>(r));
        std::vector<double> z1(dim), z(dim);
        prob.sample(rng, z1.data());
        CompensatedSum s;
        s.add(prob.h(z1.data(), z1.data()));
        for (std::size_t m = 1; m < N; ++m) {
          prob.sample(rng, z.data());
          s.add(prob.h(z1.data(), z.data()));
        }
        gaps[r] = std::abs(s.value() / static_cast<double>(N) - prob.integral(z1.data()));
      } catch (...) {
#pragma omp critical(chaoskit_lln_err)
        if (!err) err = std::current_exception();
      }
    }
    if (err) std::rethrow_exception(err);
    const MeanSE ms = mean_se(gaps);
    rows.push_back({N, ms.mean, ms.se});
  }
  return rows;
}

FluctuationTerms fluctuation_terms(const ModelSpec& model, const MeasureFlow& flow,
                                   const ParticleEnsemble& ensemble, double s) {
  ensemble.validate();
  if (ensemble.d != model.d) throw DomainError("fluctuation_terms: dimension mismatch");
  const ParticleEnsemble& cloud = flow.at(s);
  ModelSpec inter = model;  // interaction parts only
  inter.b0 = [d = model.d](const double*, double* out) {
    for (int k = 0; k < d; ++k) out[k] = 0.0;
  };
  const int d = model.d, n = model.n;
  FluctuationTerms out;
  CompensatedSum sb, ss;
  for (std::size_t i = 0; i < ensemble.N; ++i) {
    const std::span<const double> x(ensemble.particle(i), d);
    const auto emp = eval_mean_field_fields(inter, x, ensemble.view());
    const auto lim = eval_mean_field_fields(inter, x, cloud.view());
    double b2 = 0.0;
    for (int k = 0; k < d; ++k) {
      const double v = emp.drift[k] - lim.drift[k];
      b2 += v * v;
    }
    sb.add(std::sqrt(b2));
    if (model.has_sigma()) {
      // S S^T - F F^T with S, F the d x n averages
      double hs = 0.0;
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          double e = 0.0, f = 0.0;
          for (int l = 0; l < n; ++l) {
            e += emp.diffusion[a * n + l] * emp.diffusion[b * n + l];
            f += lim.diffusion[a * n + l] * lim.diffusion[b * n + l];
          }
          hs += (e - f) * (e - f);
        }
      ss.add(std::sqrt(hs));
    }
  }
  out.drift = sb.value();
  out.diffusion = ss.value();
  return out;
}

MomentCurve second_moment_curve(const Trajectory& traj) {
  if (traj.times.empty() || traj.R < 1 || traj.N < 1)
    throw DomainError("second_moment_curve: empty trajectory");
  MomentCurve c;
  c.t = traj.times;
  const int d = traj.d;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    std::vector<double> per;
    if (traj.R >= 2) {
      per.resize(traj.R);
      for (std::size_t r = 0; r < traj.R; ++r) {
        CompensatedSum s;
        for (std::size_t i = 0; i < traj.N; ++i) s.add(norm2(traj.at(k, r, i), d));
        per[r] = s.value() / static_cast<double>(traj.N);
      }
    } else {
      per.resize(traj.N);
      for (std::size_t i = 0; i < traj.N; ++i) per[i] = norm2(traj.at(k, 0, i), d);
    }
    const MeanSE ms = mean_se(per);
    c.mean.push_back(ms.mean);
    c.stderr.push_back(ms.se);
  }
  return c;
}

MomentCurve second_moment_curve(const MeasureFlow& flow) {
  if (flow.size() == 0) throw DomainError("second_moment_curve: empty flow");
  MomentCurve c;
  c.t = flow.times;
  for (const auto& cloud : flow.clouds) {
    std::vector<double> per(cloud.N);
    for (std::size_t i = 0; i < cloud.N; ++i) per[i] = norm2(cloud.particle(i), cloud.d);
    const MeanSE ms = mean_se(per);
    c.mean.push_back(ms.mean);
    c.stderr.push_back(ms.se);
  }
  return c;
}

}  // namespace chaoskit
