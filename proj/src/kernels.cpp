#include "chaoskit/kernels.hpp"

#include <omp.h>

#include <cmath>
#include <exception>
#include <vector>

#include "chaoskit/error.hpp"
#include "chaoskit/numeric.hpp"

namespace chaoskit {

void set_threads(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

int max_threads() { return omp_get_max_threads(); }

void system_fields(const ModelSpec& model, std::span<const double> x, std::size_t R,
                   std::size_t N, std::span<const std::uint32_t> order, std::span<double> drift,
                   std::span<double> diffusion, Exec exec) {
  if (exec == Exec::serial)
    serial::system_fields(model, x, R, N, order, drift, diffusion);
  else
    parallel::system_fields(model, x, R, N, order, drift, diffusion);
}

void flow_fields(const ModelSpec& model, std::span<const double> points, std::size_t P,
                 std::span<const double> cloud, std::size_t Nc, std::span<double> drift,
                 std::span<double> diffusion, Exec exec) {
  if (exec == Exec::serial)
    serial::flow_fields(model, points, P, cloud, Nc, drift, diffusion);
  else
    parallel::flow_fields(model, points, P, cloud, Nc, drift, diffusion);
}

void cost_matrix(std::span<const double> A, std::span<const double> B, std::size_t M,
                 std::size_t m, int d, double eta, std::span<double> C, Exec exec) {
  if (exec == Exec::serial)
    serial::cost_matrix(A, B, M, m, d, eta, C);
  else
    parallel::cost_matrix(A, B, M, m, d, eta, C);
}

namespace parallel {

namespace {

// Error-free transformation; four interleaved lanes keep the dependency
// chain short. Lane j mod 4 follows the canonical order, so the result is
// fixed by the multiset of cloud points.
struct Lanes {
  double s[4] = {0, 0, 0, 0};
  double c[4] = {0, 0, 0, 0};
  inline void add(int l, double v) {
    const double t = s[l] + v;
    const double bp = t - s[l];
    c[l] += (s[l] - (t - bp)) + (v - bp);
    s[l] = t;
  }
  double total() const {
    CompensatedSum acc;
    for (int l = 0; l < 4; ++l) acc.add(s[l]);
    for (int l = 0; l < 4; ++l) acc.add(c[l]);
    return acc.value();
  }
};

// sum_j (1 + |x - y_j|^2)^{-1/2}; idx == nullptr means y in storage order.
double radial_sum(const double* x, const double* y, const std::uint32_t* idx, std::size_t n, int d) {
  Lanes L;
  if (d == 1) {
    const double x0 = x[0];
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      for (int l = 0; l < 4; ++l) {
        const double yv = idx ? y[idx[j + l]] : y[j + l];
        const double u = x0 - yv;
        L.add(l, 1.0 / std::sqrt(1.0 + u * u));
      }
    }
    for (; j < n; ++j) {
      const double u = x0 - (idx ? y[idx[j]] : y[j]);
      L.add(static_cast<int>(j & 3), 1.0 / std::sqrt(1.0 + u * u));
    }
    return L.total();
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double* yj = y + static_cast<std::size_t>(idx ? idx[j] : j) * d;
    L.add(static_cast<int>(j & 3), 1.0 / std::sqrt(1.0 + dist2(x, yj, d)));
  }
  return L.total();
}

void mean_of(const double* y, const std::uint32_t* idx, std::size_t n, int d, double* out) {
  for (int k = 0; k < d; ++k) {
    CompensatedSum s;
    for (std::size_t j = 0; j < n; ++j) s.add(y[static_cast<std::size_t>(idx ? idx[j] : j) * d + k]);
    out[k] = s.value() / static_cast<double>(n);
  }
}

// One row: fields at point p against cloud y (ordered by idx, or storage
// order if idx is null). mean is the precomputed cloud mean (consensus only).
void row_fields(const ModelSpec& model, const double* p, const double* y, const std::uint32_t* idx,
                std::size_t n, const double* mean, double* drift, double* diff,
                std::vector<double>& tmp_b, std::vector<double>& tmp_s,
                std::vector<CompensatedSum>& acc_b, std::vector<CompensatedSum>& acc_s) {
  const int d = model.d, nn = model.n;
  const std::size_t dn = static_cast<std::size_t>(d) * nn;
  const double inv = 1.0 / static_cast<double>(n);
  model.b0(p, drift);
  if (model.consensus) {
    const double kappa = model.consensus->kappa;
    for (int k = 0; k < d; ++k) drift[k] += kappa * (mean[k] - p[k]);
  } else if (model.has_b1()) {
    for (auto& a : acc_b) a = CompensatedSum{};
    for (std::size_t j = 0; j < n; ++j) {
      model.b1(p, y + static_cast<std::size_t>(idx ? idx[j] : j) * d, tmp_b.data());
      for (int k = 0; k < d; ++k) acc_b[k].add(tmp_b[k]);
    }
    for (int k = 0; k < d; ++k) drift[k] += acc_b[k].value() * inv;
  }
  if (model.radial) {
    const double g = model.radial->scale * radial_sum(p, y, idx, n, d) * inv;
    for (std::size_t k = 0; k < dn; ++k) diff[k] = g * model.radial->matrix[k];
  } else if (model.has_sigma()) {
    for (auto& a : acc_s) a = CompensatedSum{};
    for (std::size_t j = 0; j < n; ++j) {
      model.sigma(p, y + static_cast<std::size_t>(idx ? idx[j] : j) * d, tmp_s.data());
      for (std::size_t k = 0; k < dn; ++k) acc_s[k].add(tmp_s[k]);
    }
    for (std::size_t k = 0; k < dn; ++k) diff[k] = acc_s[k].value() * inv;
  } else {
    for (std::size_t k = 0; k < dn; ++k) diff[k] = 0.0;
  }
}

bool all_finite(const double* v, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k)
    if (!std::isfinite(v[k])) return false;
  return true;
}

}  // namespace

void system_fields(const ModelSpec& model, std::span<const double> x, std::size_t R,
                   std::size_t N, std::span<const std::uint32_t> order, std::span<double> drift,
                   std::span<double> diffusion) {
  const int d = model.d;
  const std::size_t dn = static_cast<std::size_t>(d) * model.n;
  std::vector<double> means(model.consensus ? R * d : 0);
  if (model.consensus) {
#pragma omp parallel for schedule(static)
    for (std::size_t r = 0; r < R; ++r)
      mean_of(x.data() + r * N * d, order.data() + r * N, N, d, means.data() + r * d);
  }
  const std::size_t rows = R * N;
  bool bad = false;
  std::exception_ptr err;
#pragma omp parallel
  {
    std::vector<double> tb(d), ts(dn);
    std::vector<CompensatedSum> ab(d), as(dn);
#pragma omp for schedule(static)
    for (std::size_t row = 0; row < rows; ++row) {
      const std::size_t r = row / N;
      try {
        row_fields(model, x.data() + row * d, x.data() + r * N * d, order.data() + r * N, N,
                   model.consensus ? means.data() + r * d : nullptr, drift.data() + row * d,
                   diffusion.data() + row * dn, tb, ts, ab, as);
        if (!all_finite(drift.data() + row * d, d) || !all_finite(diffusion.data() + row * dn, dn)) {
#pragma omp atomic write
          bad = true;
        }
      } catch (...) {
#pragma omp critical(chaoskit_kernel_error)
        if (!err) err = std::current_exception();
      }
    }
  }
  if (err) std::rethrow_exception(err);
  if (bad) throw NumericError("system_fields: non-finite coefficient value");
}

void flow_fields(const ModelSpec& model, std::span<const double> points, std::size_t P,
                 std::span<const double> cloud, std::size_t Nc, std::span<double> drift,
                 std::span<double> diffusion) {
  const int d = model.d;
  const std::size_t dn = static_cast<std::size_t>(d) * model.n;
  std::vector<double> mean(d);
  if (model.consensus) mean_of(cloud.data(), nullptr, Nc, d, mean.data());
  bool bad = false;
  std::exception_ptr err;
#pragma omp parallel
  {
    std::vector<double> tb(d), ts(dn);
    std::vector<CompensatedSum> ab(d), as(dn);
#pragma omp for schedule(static)
    for (std::size_t p = 0; p < P; ++p) {
      try {
        row_fields(model, points.data() + p * d, cloud.data(), nullptr, Nc, mean.data(),
                   drift.data() + p * d, diffusion.data() + p * dn, tb, ts, ab, as);
        if (!all_finite(drift.data() + p * d, d) || !all_finite(diffusion.data() + p * dn, dn)) {
#pragma omp atomic write
          bad = true;
        }
      } catch (...) {
#pragma omp critical(chaoskit_kernel_error)
        if (!err) err = std::current_exception();
      }
    }
  }
  if (err) std::rethrow_exception(err);
  if (bad) throw NumericError("flow_fields: non-finite coefficient value");
}

void cost_matrix(std::span<const double> A, std::span<const double> B, std::size_t M,
                 std::size_t m, int d, double eta, std::span<double> C) {
  const std::size_t w = m * d;
  const bool linear = eta == 1.0;
  const double half = 0.5 * eta;
#pragma omp parallel for schedule(static)
  for (std::size_t a = 0; a < M; ++a) {
    for (std::size_t b = 0; b < M; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double q = dist2(A.data() + a * w + i * d, B.data() + b * w + i * d, d);
        s += linear ? std::sqrt(q) : (q > 0.0 ? std::pow(q, half) : 0.0);
      }
      C[a * M + b] = s;
    }
  }
}

}  // namespace parallel

}  // namespace chaoskit
