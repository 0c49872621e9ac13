#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace chaoskit {

struct ModelConstants {
  double K1 = 0.0;
  double K2 = 1.0;
  double R = 1.0;
  double Kb = 0.0;
  double Ksigma = 0.0;
};

// gamma(r) bounding <x-y, b0(x)-b0(y)> <= gamma(|x-y|) |x-y|.
class DissipativityProfile {
 public:
  enum class Kind { piecewise, override_fn };

  DissipativityProfile() = default;

  static DissipativityProfile piecewise(double K1, double K2, double R);
  // gamma(r) <= -tail_K2 * r must hold for r >= tail_radius.
  static DissipativityProfile override_fn(std::function<double(double)> gamma, double tail_K2,
                                          double tail_radius, std::string label = "override");

  double operator()(double r) const;

  Kind kind() const noexcept { return kind_; }
  double K1() const noexcept { return K1_; }
  double K2() const noexcept { return K2_; }
  double R() const noexcept { return R_; }
  // Beyond this radius gamma(r) = -K2 r (piecewise) or <= -K2 r (override).
  double tail_start() const noexcept { return kind_ == Kind::piecewise ? 2.0 * R_ : tail_radius_; }
  const std::string& label() const noexcept { return label_; }

 private:
  Kind kind_ = Kind::piecewise;
  double K1_ = 0.0;
  double K2_ = 1.0;
  double R_ = 1.0;
  double tail_radius_ = 0.0;
  std::function<double(double)> fn_;
  std::string label_ = "piecewise";
};

double gamma_profile(const DissipativityProfile& profile, double r);

// x, y and outputs are raw pointers into row-major storage. sigma writes a
// d x n matrix row-major.
using DriftFn = std::function<void(const double* x, double* out)>;
using PairFn = std::function<void(const double* x, const double* y, double* out)>;

// Structured interaction forms that the kernels evaluate without going
// through std::function. Both are optional; the generic evaluators must
// agree with them.
struct ConsensusDrift {  // b1(x, y) = kappa (y - x)
  double kappa = 0.0;
};
struct RadialDiffusion {  // sigma(x, y) = c (1 + |x-y|^2)^{-1/2} M
  double scale = 0.0;
  std::vector<double> matrix;  // d x n row-major
};

struct ModelSpec {
  std::string family = "custom";
  int d = 1;
  int n = 1;
  double beta = 1.0;
  ModelConstants constants;
  DissipativityProfile profile;

  DriftFn b0;
  PairFn b1;     // nullptr means identically zero
  PairFn sigma;  // nullptr means identically zero

  std::optional<ConsensusDrift> consensus;
  std::optional<RadialDiffusion> radial;

  bool certified = false;

  bool has_b1() const noexcept { return static_cast<bool>(b1); }
  bool has_sigma() const noexcept { return static_cast<bool>(sigma); }
  void validate() const;  // throws DomainError
};

struct MeanFieldFields {
  std::vector<double> drift;      // d
  std::vector<double> diffusion;  // d x n row-major
};

// drift = b0(x) + (1/N) sum_j b1(x, x^j), diffusion = (1/N) sum_j sigma(x, x^j),
// j over the whole cloud (self term included). cloud is N x d row-major.
MeanFieldFields eval_mean_field_fields(const ModelSpec& model, std::span<const double> x,
                                       std::span<const double> cloud);

struct AssumptionWitness {
  std::vector<double> x1, y1, x2, y2;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct AssumptionCheck {
  std::string name;
  double max_ratio = 0.0;
  bool pass = true;
  std::optional<AssumptionWitness> witness;  // worst pair when the check fails
};

struct AssumptionReport {
  AssumptionCheck sigma_lipschitz;  // (i)
  AssumptionCheck sigma_bound;      // (ii)
  AssumptionCheck b1_lipschitz;     // (iii)
  AssumptionCheck dissipativity;    // (iv)
  std::size_t samples = 0;
  double tolerance = 0.0;
  bool pass = true;
};

AssumptionReport verify_assumptions(const ModelSpec& model, std::size_t sample_budget,
                                    double radius, std::uint64_t seed, double tol = 1e-9);

// Largest eigenvalue of a symmetric PSD matrix (power iteration).
double power_iteration_max_eig(std::span<const double> sym, int dim, int iters = 500,
                               double tol = 1e-14);

// Built-in families.
struct LinearParams {
  int d = 1;
  int n = 1;
  double beta = 1.0;
  double a = 1.0;      // b0(x) = -a x
  double kappa = 0.0;  // b1(x, y) = kappa (y - x)
  double sigma_scale = 0.0;
  std::vector<double> sigma_matrix;  // d x n; identity-like default when empty
};
ModelSpec make_linear_model(const LinearParams& p);

struct DoubleWellParams {
  int d = 1;
  int n = 1;
  double beta = 1.0;
  double kappa = 0.0;
  double sigma_scale = 0.0;
  std::vector<double> sigma_matrix;
  double fit_K2 = 1.0;
  double fit_extent = 5.0;  // the fit box is [-extent, extent]^d (sampled for d > 1)
};
// b0(x) = x - |x|^2 x
ModelSpec make_double_well_model(const DoubleWellParams& p);

// psi(r) = sup over |x-y| = r of <x-y, b0(x)-b0(y)> / r, sampled on a grid.
struct DissipativityFit {
  double K1 = 0.0;
  double K2 = 0.0;
  double R = 0.0;
  std::vector<double> r;
  std::vector<double> psi;
};
DissipativityFit fit_dissipativity(const ModelSpec& model, double K2, double extent,
                                   std::size_t grid = 401, std::uint64_t seed = 1);

// Lipschitz constant of u -> (1 + |u|^2)^{-1/2}.
inline constexpr double kRadialLipschitz = 0.38490017945975052;  // 2 / (3 sqrt 3)

}  // namespace chaoskit
