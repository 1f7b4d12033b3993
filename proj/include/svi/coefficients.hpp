#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "svi/errors.hpp"
#include "svi/expression.hpp"
#include "svi/measures.hpp"

namespace svi {

using CoefficientFn = std::function<double(double t, double x, const EmpiricalMeasure& mu)>;

/// Regularity constants a coefficient pair claims to satisfy.
struct DeclaredConstants {
  double C = 1.0;
  double l = 1.0;      // superlinearity degree of the drift
  double alpha = 0.0;  // Hoelder exponent offset, diffusion is (alpha + 1/2)-Hoelder
  double p0 = 8.0;     // moment order
  bool measure_dependent = false;
};

/// Drift b(t, x, mu) and diffusion sigma(t, x, mu).
struct CoefficientPair {
  std::string name;
  CoefficientFn drift;
  CoefficientFn diffusion;
  DeclaredConstants declared;
};

/// b(t, x, mu); throws NonFinite on NaN/inf output.
double eval_drift(const CoefficientPair& pair, double t, double x, const EmpiricalMeasure& mu);
double eval_diffusion(const CoefficientPair& pair, double t, double x, const EmpiricalMeasure& mu);

/// self_term(x) + (1/N) sum_i interaction(x, y_i) for mu = (1/N) sum delta_{y_i}.
struct MeanFieldKernel {
  std::function<double(double)> self_term;
  std::function<double(double, double)> interaction;

  double operator()(double x, const EmpiricalMeasure& mu) const;
};

/// b = x - 2x^3, sigma = |x^2 + x|^(1/2 + alpha).
CoefficientPair toy_cubic(double alpha = 0.0);
/// b = -x + mean(mu), sigma constant.
CoefficientPair ou_meanfield(double sigma = 1.0);
/// b = kappa (theta - x), sigma = sqrt(max(x, 0)); meant for psi = indicator of [0, inf).
CoefficientPair cir_like(double kappa = 1.0, double theta = 1.0);
/// b and sigma constant.
CoefficientPair constant_pair(double drift, double diffusion);
/// Both coefficients built from kernels (measure-dependent by construction).
CoefficientPair from_kernels(std::string name, MeanFieldKernel drift, MeanFieldKernel diffusion,
                             DeclaredConstants declared);
/// Parsed arithmetic expressions; measure_dependent is inferred from the sources.
CoefficientPair from_expressions(std::string_view drift, std::string_view diffusion, DeclaredConstants declared);

/// True when outputs agree on two unrelated random measures at a few points.
bool appears_measure_independent(const CoefficientPair& pair);

// ---------------------------------------------------------------------------
// Sampling validators for the growth and regularity assumptions.

/// Deterministic sampling plan: Halton points over [-R, R] x [0, T] for each
/// radius, plus the corner points -R, 0, R and t = 0, T.
struct SamplingPlan {
  std::vector<double> radii{1.0, 2.5, 5.0, 10.0};
  double horizon = 1.0;
  int x_samples = 160;
  int t_samples = 3;
  double tol = 1e-8;
};

struct Witness {
  double t = 0.0;
  double x = 0.0;
  double x2 = 0.0;
  std::size_t mu_index = 0;
  std::size_t mu2_index = 0;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct ValidationCheck {
  std::string name;
  double estimate = 0.0;  // smallest constant consistent with the samples
  double declared = 0.0;  // bound the estimate is compared against
  bool passed = true;
  std::optional<Witness> witness;
  std::string detail;
};

struct RadiusEstimate {
  double radius = 0.0;
  double growth_constant = 0.0;
  double dissipativity_constant = 0.0;
  double lipschitz_drift = 0.0;   // L_R for b
  double hoelder_diffusion = 0.0; // L_R for sigma at exponent alpha + 1/2
};

struct ValidationReport {
  std::string assumption;
  std::vector<ValidationCheck> checks;
  std::vector<RadiusEstimate> per_radius;
  double p0_threshold = 0.0;  // 4l + 4

  bool passed() const;
  std::vector<ValidationCheck> violations() const;
  /// Throws AssumptionViolation carrying the first failing check.
  void throw_if_violated() const;
};

class AssumptionViolation : public Error {
 public:
  explicit AssumptionViolation(ValidationCheck check);
  const ValidationCheck& check() const { return check_; }

 private:
  ValidationCheck check_;
};

using MeasureSampler = std::function<EmpiricalMeasure(std::size_t index)>;

/// Random measures with 1..8 atoms uniform on [-radius, radius], keyed by index.
MeasureSampler default_measure_sampler(double radius, std::uint64_t seed = 7);

/// Growth, one-sided growth, local Lipschitz/Hoelder checks for a
/// measure-free pair. Throws InvalidParams for measure-dependent pairs.
ValidationReport validate_assumption1(const CoefficientPair& pair, const SamplingPlan& plan = {});

/// Measure-dependent growth, Lipschitz-in-(x, W1), bounded and Hoelder
/// diffusion checks over sampled (x, x', mu, mu') tuples.
ValidationReport validate_assumption2(const CoefficientPair& pair, const SamplingPlan& plan,
                                      const MeasureSampler& sampler);

/// Halton radical inverse of index in the given base.
double halton(std::size_t index, unsigned base);

}  // namespace svi
