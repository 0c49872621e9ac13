// Serial reference kernels against the OpenMP kernels on the same inputs.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <vector>

#include "chaoskit/ensemble.hpp"
#include "chaoskit/kernels.hpp"
#include "chaoskit/model.hpp"
#include "chaoskit/rng.hpp"

using namespace chaoskit;

namespace {

double seconds(const std::function<void()>& fn, int reps) {
  fn();  // warm-up
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count() / reps;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::vector<double> normals(std::size_t n, std::uint64_t seed) {
  std::vector<double> v(n);
  NoiseSource(seed, purpose::audit).normals(Channel::Misc, 0, 0, 0, v);
  return v;
}

}  // namespace

int main() {
  std::printf("threads available: %d\n", max_threads());
  std::printf("%-14s %8s %12s %12s %9s %10s\n", "kernel", "size", "serial[s]", "omp[s]", "speedup",
              "max|diff|");

  LinearParams lp;
  lp.kappa = 0.05;
  lp.sigma_scale = 0.1;
  const ModelSpec model = make_linear_model(lp);

  for (std::size_t N : {256, 1024, 2048}) {
    const std::size_t R = 1;
    const auto x = normals(R * N, 11 + N);
    std::vector<std::uint32_t> order(R * N);
    canonical_order(x, N, 1, order.data());
    std::vector<double> d1(N), s1(N), d2(N), s2(N);
    const int reps = N <= 256 ? 20 : 3;
    const double ts = seconds([&] { serial::system_fields(model, x, R, N, order, d1, s1); }, reps);
    const double tp = seconds([&] { parallel::system_fields(model, x, R, N, order, d2, s2); }, reps);
    std::printf("%-14s %8zu %12.3e %12.3e %9.2f %10.2e\n", "system_fields", N, ts, tp, ts / tp,
                std::max(max_diff(d1, d2), max_diff(s1, s2)));
  }

  for (std::size_t P : {512, 2048}) {
    const std::size_t Nc = 2048;
    auto cloud = normals(Nc, 5);
    std::sort(cloud.begin(), cloud.end());
    const auto pts = normals(P, 6 + P);
    std::vector<double> d1(P), s1(P), d2(P), s2(P);
    const double ts = seconds([&] { serial::flow_fields(model, pts, P, cloud, Nc, d1, s1); }, 3);
    const double tp = seconds([&] { parallel::flow_fields(model, pts, P, cloud, Nc, d2, s2); }, 3);
    std::printf("%-14s %8zu %12.3e %12.3e %9.2f %10.2e\n", "flow_fields", P, ts, tp, ts / tp,
                std::max(max_diff(d1, d2), max_diff(s1, s2)));
  }

  for (std::size_t M : {256, 1024}) {
    const auto A = normals(M, 7), B = normals(M, 8);
    std::vector<double> c1(M * M), c2(M * M);
    for (double eta : {1.0, 0.5}) {
      const double ts = seconds([&] { serial::cost_matrix(A, B, M, 1, 1, eta, c1); }, 5);
      const double tp = seconds([&] { parallel::cost_matrix(A, B, M, 1, 1, eta, c2); }, 5);
      std::printf("%-14s %8zu %12.3e %12.3e %9.2f %10.2e  (eta=%.1f)\n", "cost_matrix", M, ts, tp,
                  ts / tp, max_diff(c1, c2), eta);
    }
  }
  return 0;
}
