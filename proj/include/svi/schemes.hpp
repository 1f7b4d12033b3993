#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

#include "svi/coefficients.hpp"
#include "svi/convex.hpp"
#include "svi/measures.hpp"
#include "svi/noise.hpp"

namespace svi {

enum class SchemeKind { Penalized, Proximal };

/// One-step rule for dX = b dt + sigma dB - d(psi)(X) dt with a frozen measure.
struct SchemeConfig {
  SchemeKind kind = SchemeKind::Proximal;
  double n = 0.0;  // penalization parameter, Penalized only
  double dt = 0.0;
  bool taming = true;

  static SchemeConfig penalized(double n, double dt, bool taming = true) { return {SchemeKind::Penalized, n, dt, taming}; }
  static SchemeConfig proximal(double dt, bool taming = true) { return {SchemeKind::Proximal, 0.0, dt, taming}; }

  /// dt > 0; Penalized additionally needs n > 0 and n * dt <= 2.
  void validate() const;

  friend bool operator==(const SchemeConfig&, const SchemeConfig&) = default;
};

struct StepResult {
  double x_next;
  double dphi;        // increment of the constraint process
  double drift_term;  // b~ dt actually applied
  double noise_term;  // sigma dB actually applied
};

/// x + b~ dt + sigma dB - grad psi^n(x) dt, with b~ = b / (1 + dt |b|) under taming.
StepResult step_penalized(double x, double t, const EmpiricalMeasure& mu, const CoefficientPair& pair,
                          const YosidaView& view, const SchemeConfig& cfg, double dB);

/// y = x + b~ dt + sigma dB, then the resolvent of psi with lambda = dt; dphi = y - x_next.
StepResult step_proximal(double x, double t, const EmpiricalMeasure& mu, const CoefficientPair& pair,
                         const ConvexSpec& psi, const SchemeConfig& cfg, double dB);

/// Either a single measure held for all times or one measure per grid time.
class MeasureFlowRef {
 public:
  MeasureFlowRef(const EmpiricalMeasure& constant) : constant_{&constant} {}  // NOLINT
  MeasureFlowRef(std::span<const EmpiricalMeasure> flow) : flow_{flow} {}    // NOLINT

  const EmpiricalMeasure& at(std::size_t step) const;
  /// Grid points covered; SIZE_MAX for a constant flow.
  std::size_t size() const;

 private:
  const EmpiricalMeasure* constant_ = nullptr;
  std::span<const EmpiricalMeasure> flow_;
};

/// Discretized trajectory of (X, phi, |phi|) on a uniform grid.
struct PathRecord {
  std::vector<double> times;
  std::vector<double> states;
  std::vector<double> phi;
  std::vector<double> var_phi;         // running total variation of phi
  std::vector<double> drift_integral;  // running sum of b~ dt
  std::vector<double> noise_integral;  // running sum of sigma dB
  NoiseKey key;
  StreamAudit audit;

  std::size_t steps() const { return states.empty() ? 0 : states.size() - 1; }
  void reserve(std::size_t steps);
  void start(double x0);
  void push(double t, const StepResult& r);
  /// Columns t, X, phi, var_phi.
  void write_csv(std::ostream& os) const;
};

/// Where the Brownian increments come from: the dyadic grid with fine step
/// dt_fine, read at the given coarsening level. dt_fine = 0 means "use the
/// scheme's dt directly".
struct NoiseLevel {
  double dt_fine = 0.0;
  int level = 0;
};

/// Builds the increment grid for a scheme and noise level, checking that
/// the level's step equals cfg.dt.
IncrementGrid make_grid(const SchemeConfig& cfg, double horizon, const NoiseLevel& noise);

/// Full trajectory of the frozen-measure SVI under the selected one-step rule.
PathRecord simulate_frozen(const CoefficientPair& pair, const ConvexSpec& psi, const SchemeConfig& cfg, double x0,
                           const MeasureFlowRef& flow, const NoiseKey& key, double horizon,
                           const NoiseLevel& noise = {});

/// max_k |a_k - b_k| over the common grid, where `b` may be finer by a factor
/// 2^stride_log2 (its points are subsampled).
double sup_distance(std::span<const double> a, std::span<const double> b, int stride_log2 = 0);

}  // namespace svi
