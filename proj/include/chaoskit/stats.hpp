#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace chaoskit {

enum class FitScale {
  semilog,  // log y = intercept + slope x
  loglog,   // log y = intercept + slope log x
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double halfwidth = 0.0;  // of the slope confidence interval
  double r2 = 0.0;
  std::size_t n = 0;
};

// OLS on log-transformed data with a Student-t interval for the slope.
RateFit fit_rate(std::span<const double> x, std::span<const double> y, FitScale scale,
                 double confidence = 0.95);

struct MeanSE {
  double mean = 0.0;
  double se = 0.0;
};
MeanSE mean_se(std::span<const double> v);

// Kolmogorov survival function Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2).
double kolmogorov_q(double lambda);

struct KSResult {
  double D = 0.0;
  double p = 1.0;
};
// Two-sample Kolmogorov-Smirnov with the asymptotic p-value and the usual
// small-sample correction of the argument.
KSResult ks_two_sample(std::vector<double> a, std::vector<double> b);

double median(std::vector<double> v);

}  // namespace chaoskit
