#include "chaoskit/transport.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <string>

#include "chaoskit/error.hpp"
#include "chaoskit/numeric.hpp"
#include "chaoskit/rng.hpp"

namespace chaoskit {

std::string to_string(TransportMethod m) {
  switch (m) {
    case TransportMethod::sorted_1d:
      return "sorted-1d";
    case TransportMethod::assignment:
      return "assignment";
    case TransportMethod::dual_lower_bound:
      return "dual-lower-bound";
  }
  return "?";
}

namespace {

void check_eta(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw DomainError("transport: eta must lie in (0, 1]");
}

double pow_eta(double r, double eta) { return eta == 1.0 ? r : std::pow(r, eta); }

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = compensated_mean(v);
  CompensatedSum s;
  for (double x : v) s.add((x - m) * (x - m));
  return std::sqrt(s.value() / static_cast<double>(v.size() - 1));
}

// k distinct indices out of n, in increasing order.
std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t k, SequentialRng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<double> gather(std::span<const double> X, const std::vector<std::size_t>& idx,
                           std::size_t stride) {
  std::vector<double> out(idx.size() * stride);
  for (std::size_t a = 0; a < idx.size(); ++a)
    std::copy_n(X.data() + idx[a] * stride, stride, out.data() + a * stride);
  return out;
}

}  // namespace

double cost_l1eta(std::span<const double> x, std::span<const double> y, int d, double eta) {
  check_eta(eta);
  if (d < 1 || x.size() != y.size() || x.size() % static_cast<std::size_t>(d) != 0)
    throw DomainError("cost_l1eta: shape mismatch");
  const std::size_t m = x.size() / d;
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    s += pow_eta(std::sqrt(dist2(x.data() + i * d, y.data() + i * d, d)), eta);
  return s;
}

WassersteinEstimate wasserstein_assignment(std::span<const double> A, std::size_t Ma,
                                           std::span<const double> B, std::size_t Mb,
                                           std::size_t m, int d, double eta,
                                           const TransportOptions& opt) {
  check_eta(eta);
  const std::size_t stride = m * static_cast<std::size_t>(d);
  if (Ma < 1 || Mb < 1 || m < 1 || d < 1) throw DomainError("transport: empty cloud");
  if (A.size() != Ma * stride || B.size() != Mb * stride)
    throw DomainError("transport: cloud size does not match M*m*d");

  std::size_t M = std::min(Ma, Mb);
  if (M > opt.cap) {
    if (!opt.subsample)
      throw DomainError("transport: M = " + std::to_string(M) + " exceeds the assignment cap " +
                        std::to_string(opt.cap) + "; enable subsampling to proceed");
    M = opt.cap;
  }

  const NoiseSource src(opt.seed, purpose::bootstrap);
  std::vector<double> As, Bs;
  std::span<const double> a = A, b = B;
  if (Ma != M) {
    SequentialRng rng(src.split(1));
    As = gather(A, subsample_indices(Ma, M, rng), stride);
    a = As;
  }
  if (Mb != M) {
    SequentialRng rng(src.split(2));
    Bs = gather(B, subsample_indices(Mb, M, rng), stride);
    b = Bs;
  }

  std::vector<double> C(M * M);
  cost_matrix(a, b, M, m, d, eta, C, opt.exec);

  WassersteinEstimate est;
  est.eta = eta;
  est.method = TransportMethod::assignment;
  est.M_a = est.M_b = M;
  est.value = std::max(0.0, solve_assignment(C, M).total / static_cast<double>(M));

  if (opt.bootstrap > 0) {
    std::vector<double> boot(opt.bootstrap);
    const NoiseSource bsrc = src.split(3);
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 1) if (opt.exec == Exec::parallel)
    for (std::size_t r = 0; r < opt.bootstrap; ++r) {
      try {
        SequentialRng rng(bsrc, static_cast<std::uint32_t>(r));
        std::vector<std::size_t> ia(M), ib(M);
        for (auto& i : ia) i = rng.below(M);
        for (auto& j : ib) j = rng.below(M);
        std::vector<double> Cb(M * M);
        for (std::size_t i = 0; i < M; ++i)
          for (std::size_t j = 0; j < M; ++j) Cb[i * M + j] = C[ia[i] * M + ib[j]];
        boot[r] = solve_assignment(Cb, M).total / static_cast<double>(M);
      } catch (...) {
#pragma omp critical(chaoskit_boot_err)
        if (!err) err = std::current_exception();
      }
    }
    if (err) std::rethrow_exception(err);
    est.stderr = sample_sd(boot);
  }
  return est;
}

WassersteinEstimate wasserstein_1d(std::span<const double> A, std::span<const double> B,
                                   double eta, const TransportOptions& opt) {
  check_eta(eta);
  if (A.empty() || A.size() != B.size())
    throw DomainError("wasserstein_1d: clouds must be nonempty with equal counts");
  const std::size_t M = A.size();
  auto sorted_cost = [eta, M](std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CompensatedSum s;
    for (std::size_t k = 0; k < M; ++k) s.add(pow_eta(std::abs(a[k] - b[k]), eta));
    return s.value() / static_cast<double>(M);
  };

  WassersteinEstimate est;
  est.eta = eta;
  est.method = TransportMethod::sorted_1d;
  est.M_a = est.M_b = M;
  est.upper_bound = eta < 1.0;
  est.value = sorted_cost({A.begin(), A.end()}, {B.begin(), B.end()});

  if (opt.bootstrap > 0) {
    const NoiseSource bsrc = NoiseSource(opt.seed, purpose::bootstrap).split(4);
    std::vector<double> boot(opt.bootstrap);
#pragma omp parallel for schedule(static) if (opt.exec == Exec::parallel)
    for (std::size_t r = 0; r < opt.bootstrap; ++r) {
      SequentialRng rng(bsrc, static_cast<std::uint32_t>(r));
      std::vector<double> a(M), b(M);
      for (auto& x : a) x = A[rng.below(M)];
      for (auto& y : b) y = B[rng.below(M)];
      boot[r] = sorted_cost(std::move(a), std::move(b));
    }
    est.stderr = sample_sd(boot);
  }
  return est;
}

std::vector<DualTest> default_dual_tests(std::span<const double> anchors, std::size_t count,
                                         std::size_t m, int d, double eta) {
  check_eta(eta);
  const std::size_t stride = m * static_cast<std::size_t>(d);
  if (anchors.size() != count * stride) throw DomainError("dual tests: anchor shape mismatch");
  std::vector<DualTest> tests;
  for (std::size_t c = 0; c < count; ++c) {
    std::vector<double> anchor(anchors.begin() + c * stride, anchors.begin() + (c + 1) * stride);
    tests.emplace_back([anchor = std::move(anchor), m, d, eta](const double* x) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i)
        s += pow_eta(std::sqrt(dist2(x + i * d, anchor.data() + i * d, d)), eta);
      return s;
    });
  }
  if (eta == 1.0) {
    for (std::size_t i = 0; i < m; ++i)
      for (int k = 0; k < d; ++k)
        tests.emplace_back([off = i * d + k](const double* x) { return x[off]; });
    for (int k = 0; k < d; ++k)
      tests.emplace_back([m, d, k](const double* x) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += x[i * d + k];
        return s;
      });
  }
  return tests;
}

WassersteinEstimate dual_lower_bound(std::span<const double> A, std::size_t Ma,
                                     std::span<const double> B, std::size_t Mb,
                                     const std::vector<DualTest>& tests, double eta) {
  check_eta(eta);
  if (Ma < 1 || Mb < 1 || A.size() % Ma != 0 || B.size() / Mb != A.size() / Ma ||
      B.size() % Mb != 0)
    throw DomainError("dual_lower_bound: cloud shape mismatch");
  const std::size_t stride = A.size() / Ma;
  WassersteinEstimate est;
  est.eta = eta;
  est.method = TransportMethod::dual_lower_bound;
  est.M_a = Ma;
  est.M_b = Mb;
  for (const auto& f : tests) {
    CompensatedSum sa, sb;
    for (std::size_t a = 0; a < Ma; ++a) sa.add(f(A.data() + a * stride));
    for (std::size_t b = 0; b < Mb; ++b) sb.add(f(B.data() + b * stride));
    const double gap = std::abs(sa.value() / static_cast<double>(Ma) -
                                sb.value() / static_cast<double>(Mb));
    est.value = std::max(est.value, gap);
  }
  return est;
}

}  // namespace chaoskit
