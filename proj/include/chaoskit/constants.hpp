#pragma once

#include <cstddef>
#include <vector>

#include "chaoskit/model.hpp"

namespace chaoskit {

// Phi(s) = int_0^s gamma(v) dv. Closed form for the piecewise profile; for
// overrides a cumulative G7K15 table on a fixed panel grid up to `radius`,
// continued beyond it with the declared tail -K2 v.
class Potential {
 public:
  Potential(const DissipativityProfile& profile, double radius);
  double operator()(double s) const;
  double radius() const noexcept { return radius_; }

 private:
  DissipativityProfile profile_;
  double radius_;
  double h_ = 0.0;
  std::vector<double> cum_;  // Phi at panel boundaries k * h_
};

struct DeltaResult {
  double delta = 0.0;
  double error = 0.0;               // absolute
  double truncation_radius = 0.0;   // where numerical integration stops
  bool tail_closed_form = false;    // tail beyond truncation is exact
  std::size_t evaluations = 0;
};

// delta = int_0^inf s exp(Phi(s) / (2 beta)) ds
DeltaResult compute_delta(const DissipativityProfile& profile, double beta);

struct ContractionConstants {
  double beta = 1.0;
  double K2 = 1.0;
  double Kb = 0.0;
  double Ksigma = 0.0;
  double delta = 0.0;
  double c_E = 0.0;
  double lambda0 = 0.0;
  DeltaResult quadrature;
};

// Builds c_E and lambda0 from delta; the primitive constructor used by tests
// that want to pin (delta, beta, K2) directly.
ContractionConstants make_constants(double delta, double beta, double K2, double Kb,
                                    double Ksigma);
ContractionConstants contraction_constants(const ModelSpec& model,
                                           const DissipativityProfile& profile);

// f(r) = int_0^r f'(u) du,  f'(r) = int_r^inf s exp((Phi(s) - Phi(r)) / (2 beta)) ds,
// f'' = -gamma f' / (2 beta) - r.
class FFunction {
 public:
  struct Value {
    double f = 0.0;
    double df = 0.0;
    double d2f = 0.0;
  };

  FFunction(const DissipativityProfile& profile, double beta, std::size_t table_nodes = 1024);

  Value eval(double r) const;
  double value(double r) const;       // cubic Hermite on the table, exact linear tail
  double derivative(double r) const;  // adaptive quadrature
  double second(double r) const;
  double value_exact(double r) const;  // nested adaptive quadrature, slow
  double delta() const noexcept { return delta_; }
  double table_radius() const noexcept { return r_tab_; }

 private:
  DissipativityProfile profile_;
  double beta_;
  double K2_;
  double delta_;
  double r_tail_;   // beyond: f' constant (piecewise) or bounded (override)
  double r_trunc_;  // numerical cutoff for the f' integral
  Potential phi_;
  double r_tab_;
  double h_;
  std::vector<double> f_, df_;
};

FFunction::Value eval_f(const DissipativityProfile& profile, double beta, double r);

struct GResult {
  double value = 0.0;
  std::size_t terms = 0;
  bool converged = true;
};

GResult eval_G(double a, double t, double cG, int d, const ContractionConstants& consts);

struct Kappa0Search {
  double a_max = 0.0;  // 0 selects K2
  std::size_t coarse_t = 240;
  double t_lo = 1e-6;
  double a_rel_tol = 1e-10;
};

struct Kappa0Result {
  double kappa0 = 0.0;
  bool degenerate = false;  // G >= 1 everywhere tested
  bool capped = false;      // feasible up to a_max
  double t_star = 0.0;      // minimiser of G(kappa0 - resolution, .)
  double resolution = 0.0;  // bisection bracket width at exit
  std::size_t iterations = 0;
};

// inf over t in [t_lo, T*] of G(a, t); returns (inf, argmin).
std::pair<double, double> inf_G_over_t(double a, double cG, int d,
                                       const ContractionConstants& consts,
                                       const Kappa0Search& search = {});
Kappa0Result compute_kappa0(double cG, int d, const ContractionConstants& consts,
                            const Kappa0Search& search = {});

struct HypothesisReport {
  double threshold_kbs = 0.0;     // 4 beta^2 / (K2 delta^2)
  double threshold_half_K2 = 0.0;  // K2 / 2
  Kappa0Result kappa0;
  double lhs = 0.0;               // Kb + Ksigma
  bool gate_st1 = false;          // lhs < threshold_kbs
  bool gate_st2 = false;          // lhs < K2 / 2 (also the moment bound)
  bool gate_theorem = false;      // lhs < min of the three
  double cG = 0.0;
  int d = 1;
  ContractionConstants constants;
};

HypothesisReport check_theorem_hypotheses(const ModelSpec& model,
                                          const DissipativityProfile& profile, double cG, int d);

}  // namespace chaoskit
