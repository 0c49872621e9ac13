#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "chaoskit/ensemble.hpp"
#include "chaoskit/model.hpp"

namespace chaoskit {

struct TestFunction {
  std::string name;
  std::function<double(const double*)> f;
};

// x_k clipped to [-clip, clip]; 1-Lipschitz.
TestFunction clipped_coordinate(int k, double clip);
// sqrt(|x - c|^2 + eps^2) - eps; 1-Lipschitz and smooth.
TestFunction smoothed_distance(std::vector<double> c, double eps);

struct GradientOptions {
  std::vector<std::pair<double, double>> st;  // (s, t) with t > s
  std::vector<std::vector<double>> z_grid;    // evaluation points in R^d
  double h = 1e-2;
  std::size_t mc = 2000;
  double eta = 1.0;
  std::vector<int> orders = {1};  // derivative orders to include (1 and/or 2)
  double dt = 1e-2;
  std::uint64_t seed = 0;
};

struct GradientEstimate {
  double cG = 0.0;  // max of |grad^i P f| ((t-s) ^ 1)^{(i - eta)/2}
  double stderr = 0.0;
  double s = 0.0, t = 0.0;
  std::vector<double> z;
  std::string function;
  int order = 1;
  bool ill_conditioned = false;
  double recommended_h = 0.0;
  std::string warning;
};

// Common-random-number finite differences of the decoupled semigroup.
GradientEstimate estimate_cG(const ModelSpec& model, const MeasureFlow& flow,
                             const std::vector<TestFunction>& tests, const GradientOptions& opt);

}  // namespace chaoskit
