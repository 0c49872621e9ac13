#pragma once

#include <cstddef>
#include <functional>

namespace chaoskit {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // absolute a posteriori estimate
  std::size_t evaluations = 0;
  bool converged = true;
};

// Globally adaptive Gauss-Kronrod 7/15 on [a, b]: the panel with the largest
// error estimate is bisected until the summed estimate falls below
// max(abs_tol, rel_tol * |value|).
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double rel_tol = 1e-12, double abs_tol = 0.0,
                           std::size_t max_panels = 2000);

// One non-adaptive G7K15 panel; returns the Kronrod value and |K - G|.
QuadratureResult gauss_kronrod_panel(const std::function<double(double)>& f, double a, double b);

}  // namespace chaoskit
