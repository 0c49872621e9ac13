#include <cmath>
#include <vector>

#include "chaoskit/error.hpp"
#include "chaoskit/kernels.hpp"

namespace chaoskit::serial {

void system_fields(const ModelSpec& model, std::span<const double> x, std::size_t R,
                   std::size_t N, std::span<const std::uint32_t> order, std::span<double> drift,
                   std::span<double> diffusion) {
  const int d = model.d, n = model.n;
  const std::size_t dn = static_cast<std::size_t>(d) * n;
  std::vector<double> cloud(N * d);
  for (std::size_t r = 0; r < R; ++r) {
    const double* xr = x.data() + r * N * d;
    const std::uint32_t* ord = order.data() + r * N;
    for (std::size_t j = 0; j < N; ++j)
      for (int k = 0; k < d; ++k) cloud[j * d + k] = xr[static_cast<std::size_t>(ord[j]) * d + k];
    for (std::size_t i = 0; i < N; ++i) {
      const auto f = eval_mean_field_fields(model, {xr + i * d, static_cast<std::size_t>(d)}, cloud);
      const std::size_t row = r * N + i;
      for (int k = 0; k < d; ++k) drift[row * d + k] = f.drift[k];
      for (std::size_t k = 0; k < dn; ++k) diffusion[row * dn + k] = f.diffusion[k];
    }
  }
}

void flow_fields(const ModelSpec& model, std::span<const double> points, std::size_t P,
                 std::span<const double> cloud, std::size_t Nc, std::span<double> drift,
                 std::span<double> diffusion) {
  const int d = model.d, n = model.n;
  const std::size_t dn = static_cast<std::size_t>(d) * n;
  for (std::size_t p = 0; p < P; ++p) {
    const auto f = eval_mean_field_fields(model, {points.data() + p * d, static_cast<std::size_t>(d)},
                                          cloud.first(Nc * d));
    for (int k = 0; k < d; ++k) drift[p * d + k] = f.drift[k];
    for (std::size_t k = 0; k < dn; ++k) diffusion[p * dn + k] = f.diffusion[k];
  }
}

void cost_matrix(std::span<const double> A, std::span<const double> B, std::size_t M,
                 std::size_t m, int d, double eta, std::span<double> C) {
  const std::size_t w = m * d;
  for (std::size_t a = 0; a < M; ++a)
    for (std::size_t b = 0; b < M; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        double q = 0.0;
        for (int k = 0; k < d; ++k) {
          const double t = A[a * w + i * d + k] - B[b * w + i * d + k];
          q += t * t;
        }
        s += std::pow(std::sqrt(q), eta);
      }
      C[a * M + b] = s;
    }
}

}  // namespace chaoskit::serial
