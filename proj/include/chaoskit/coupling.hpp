#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "chaoskit/constants.hpp"
#include "chaoskit/ensemble.hpp"
#include "chaoskit/model.hpp"
#include "chaoskit/sde.hpp"

namespace chaoskit {

enum class CouplingMode {
  maximal_reflection,  // reflect until the one-step laws overlap, then merge exactly
  threshold,           // reflect until |Z| <= theta, snap leg 2 onto leg 1, then synchronous
  smoothed,            // pi_R / pi_S blend with an independent stream, never merges
  synchronous,         // identical W increments throughout
};

CouplingMode parse_coupling_mode(const std::string& name);  // throws DomainError
std::string to_string(CouplingMode mode);

struct CouplingOptions {
  CouplingMode mode = CouplingMode::maximal_reflection;
  double epsilon = 0.0;          // smoothed variant width
  double merge_threshold = 0.0;  // threshold mode; 0 selects 10 sqrt(beta dt d)
  bool debug = false;            // assert reflection orthogonality every step
};

// (I - 2 e e^T) xi for a unit vector e.
void reflect(const double* e, const double* xi, int d, double* out);

// One step of the maximal reflection coupling of N(m1, s^2 I) and N(m2, s^2 I)
// from standard normals xi and a uniform u. Returns true when the legs merge.
bool maximal_reflection_step(const double* m1, const double* m2, double s, const double* xi,
                             double u, int d, double* x1, double* x2);

struct CouplingTrace {
  std::vector<double> times;
  std::vector<double> mean_fZ;
  std::vector<double> stderr_fZ;
  std::vector<double> mean_Z;
  std::vector<double> frac_merged;
  std::vector<double> tanaka;  // mean singular term (smoothed mode only)
  std::vector<double> tau;     // per replica, +inf if never merged
  // Legs at every recorded time, M*d each.
  std::vector<std::vector<double>> leg1;
  std::vector<std::vector<double>> leg2;
  std::size_t M = 0;
  int d = 1;
  double merge_threshold = 0.0;
  CouplingMode mode = CouplingMode::maximal_reflection;
};

// M replicas of two decoupled legs driven by the same flow and the same B,
// started at (x0, y0) at the flow's first time.
CouplingTrace simulate_reflection_coupling(const ModelSpec& model, const MeasureFlow& flow,
                                           std::span<const double> x0, std::span<const double> y0,
                                           std::size_t M, const SimConfig& cfg,
                                           const CouplingOptions& options, const FFunction& f);

// Particle system (R replicas x N) together with one decoupled twin per
// particle: the twin uses the particle's own B increments and either the same
// W increments (synchronous) or the maximal reflection coupling of W. The
// particle leg is bit-identical to simulate_particle_system with the same
// seed. `visit` sees (record index, time, particles, twins) at every recorded
// step, t = 0 included.
using ChaosVisitor = std::function<void(std::size_t, double, std::span<const double>,
                                        std::span<const double>)>;
void simulate_chaos_coupling(const ModelSpec& model, const MeasureFlow& flow,
                             std::span<const double> init, std::span<const double> twin_init,
                             std::size_t R, std::size_t N, const SimConfig& cfg,
                             CouplingMode mode, const ChaosVisitor& visit);

}  // namespace chaoskit
