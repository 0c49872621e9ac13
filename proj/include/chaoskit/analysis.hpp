#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "chaoskit/ensemble.hpp"
#include "chaoskit/gradient.hpp"
#include "chaoskit/model.hpp"
#include "chaoskit/rng.hpp"

namespace chaoskit {

// ---- generalized Gronwall ----

struct GronwallInput {
  std::vector<double> a;  // samples on the uniform grid k T / (a.size() - 1)
  double T = 1.0;
  double C = 0.0;
  double theta = 1.0;
  double tol = 1e-15;  // relative to the running sup of the bound
  std::size_t max_terms = 100000;

  void validate() const;
};

struct GronwallResult {
  std::vector<double> t;
  std::vector<double> bound;
  std::size_t terms = 0;
  bool converged = true;
};

// a(t) + sum_n (C Gamma(theta))^n / Gamma(n theta) int_0^t (t-s)^{n theta - 1} a(s) ds,
// with a piecewise linear and every panel integrated exactly.
GronwallResult gronwall_bound(const GronwallInput& in);

// ---- law of large numbers gap ----

struct LlnProblem {
  int dim = 1;
  std::function<double(const double* v, const double* w)> h;
  std::function<void(SequentialRng&, double*)> sample;
  std::function<double(const double* v)> integral;  // int h(v, y) law(dy)
};

LlnProblem lln_uniform_mean();   // h(v, w) = w, Z ~ U[0, 1]
LlnProblem lln_constant(double c);

struct LlnRow {
  std::size_t N = 0;
  double gap = 0.0;
  double stderr = 0.0;
};

// E |(1/N) sum_{m<=N} h(Z_1, Z_m) - int h(Z_1, y) dlaw(y)| from M replicas.
std::vector<LlnRow> lln_gap(const LlnProblem& prob, const std::vector<std::size_t>& Ns,
                            std::size_t M, std::uint64_t seed);

// ---- interaction fluctuations ----

struct FluctuationTerms {
  double drift = 0.0;      // sum_i |B^i_s|
  double diffusion = 0.0;  // sum_i ||Sigma^i_s||_HS
};

// Empirical b1 / sigma averages of an N-particle configuration against the
// same averages taken over the flow's cloud at time s.
FluctuationTerms fluctuation_terms(const ModelSpec& model, const MeasureFlow& flow,
                                   const ParticleEnsemble& ensemble, double s);

// ---- second moment ----

struct MomentCurve {
  std::vector<double> t;
  std::vector<double> mean;
  std::vector<double> stderr;
};

// Per recorded time: mean |X|^2 over all particles; the error is taken across
// replicas when there are at least two, else across particles.
MomentCurve second_moment_curve(const Trajectory& traj);
MomentCurve second_moment_curve(const MeasureFlow& flow);

// ---- Duhamel identity ----

// Time-homogeneous diffusion dX = b(X) dt + sigma(X) dW with sigma d x d.
struct DiffusionSpec {
  int d = 1;
  std::function<void(const double* x, double* out)> b;      // nullptr: zero
  std::function<void(const double* x, double* out)> sigma;  // nullptr: zero
  std::string name;
};

DiffusionSpec constant_diffusion(int d, double beta);            // b = 0, sigma = sqrt(beta) I
DiffusionSpec linear_diffusion(int d, double a, double beta);    // b = -a x, sigma = sqrt(beta) I

// x -> exp(-|x|^2 / (2 w^2)), and its heat-kernel image under sqrt(beta) W_t.
TestFunction gaussian_bump(double width, int d = 1);
double heat_gaussian_bump(double width, double beta, double t, std::span<const double> z);

struct DuhamelOptions {
  std::size_t outer = 2000;  // paths of model 1 / semigroup samples
  std::size_t inner = 200;   // paths of model 2 per finite-difference stencil
  std::size_t s_nodes = 8;   // Gauss-Legendre nodes on [0, t]
  double h = 2e-2;
  double dt = 1e-2;
  std::uint64_t seed = 0;
};

struct DuhamelPoint {
  std::vector<double> z;
  double lhs = 0.0, lhs_se = 0.0;  // P1 f - P2 f
  double rhs = 0.0, rhs_se = 0.0;  // int_0^t P1 (L1 - L2) P2 f ds
  double residual = 0.0;
  double error = 0.0;  // sqrt(lhs_se^2 + rhs_se^2)
};

struct DuhamelResult {
  std::vector<DuhamelPoint> points;
  double max_residual = 0.0;
  double error_at_max = 0.0;
  std::string warning;  // set when the finite-difference noise dominates
};

DuhamelResult duhamel_residual(const DiffusionSpec& m1, const DiffusionSpec& m2,
                               const TestFunction& f, double t,
                               const std::vector<std::vector<double>>& z_grid,
                               const DuhamelOptions& opt);

}  // namespace chaoskit
