#pragma once

// Empirical L^eta-Wasserstein distances between clouds of M samples, each
// sample an m-tuple of points in R^d stored contiguously (M*m*d doubles).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "chaoskit/kernels.hpp"

namespace chaoskit {

enum class TransportMethod { sorted_1d, assignment, dual_lower_bound };
std::string to_string(TransportMethod m);

struct WassersteinEstimate {
  double value = 0.0;
  double eta = 1.0;
  TransportMethod method = TransportMethod::assignment;
  std::size_t M_a = 0, M_b = 0;  // sample counts actually used
  double stderr = 0.0;           // bootstrap; 0 when no resamples were drawn
  bool upper_bound = false;      // sorted matching under a concave cost
};

// sum_i |x^i - y^i|^eta over m blocks of d coordinates.
double cost_l1eta(std::span<const double> x, std::span<const double> y, int d, double eta);

// Minimum-cost perfect matching on a dense n x n matrix (row-major).
// match[row] = column. Shortest augmenting paths with potentials, O(n^3).
struct Assignment {
  std::vector<std::size_t> match;
  double total = 0.0;
};
Assignment solve_assignment(std::span<const double> C, std::size_t n);

struct TransportOptions {
  std::size_t cap = 2048;
  std::size_t bootstrap = 200;  // resamples for the standard error; 0 disables
  bool subsample = false;       // allow M > cap by subsampling both clouds to cap
  std::uint64_t seed = 0;
  Exec exec = Exec::parallel;
};

// Unequal counts are reduced to the smaller one by a seeded subsample.
WassersteinEstimate wasserstein_assignment(std::span<const double> A, std::size_t Ma,
                                           std::span<const double> B, std::size_t Mb,
                                           std::size_t m, int d, double eta,
                                           const TransportOptions& opt = {});

WassersteinEstimate wasserstein_1d(std::span<const double> A, std::span<const double> B,
                                   double eta, const TransportOptions& opt = {});

// A test function is certified by its caller to satisfy
// |f(x) - f(y)| <= ||x - y||_{1,eta}.
using DualTest = std::function<double(const double*)>;

// x -> sum_i |x^i - c^i|^eta for anchors c, plus +-x^i_k when eta = 1.
std::vector<DualTest> default_dual_tests(std::span<const double> anchors, std::size_t count,
                                         std::size_t m, int d, double eta);

WassersteinEstimate dual_lower_bound(std::span<const double> A, std::size_t Ma,
                                     std::span<const double> B, std::size_t Mb,
                                     const std::vector<DualTest>& tests, double eta);

}  // namespace chaoskit
