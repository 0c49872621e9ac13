#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace chaoskit {

// Neumaier compensated accumulator.
struct CompensatedSum {
  double sum = 0.0;
  double c = 0.0;

  void add(double v) noexcept {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      c += (sum - t) + v;
    else
      c += (v - t) + sum;
    sum = t;
  }
  double value() const noexcept { return sum + c; }
};

inline double compensated_mean(std::span<const double> v) {
  CompensatedSum s;
  for (double x : v) s.add(x);
  return v.empty() ? 0.0 : s.value() / static_cast<double>(v.size());
}

inline double dot(const double* a, const double* b, int d) {
  double s = 0.0;
  for (int k = 0; k < d; ++k) s += a[k] * b[k];
  return s;
}

inline double norm2(const double* a, int d) { return dot(a, a, d); }

inline double dist2(const double* a, const double* b, int d) {
  double s = 0.0;
  for (int k = 0; k < d; ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

}  // namespace chaoskit
