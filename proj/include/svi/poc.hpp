#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "svi/mckean_vlasov.hpp"

namespace svi {

struct PocRow {
  std::size_t N = 0;
  std::size_t trials = 0;
  double mean_sup_error = 0.0;  // average over trials and probe particles of sup_k |X^{N,i}_k - Xbar^i_k|
  double std_error = 0.0;       // standard error of that average
  double w2sq_mean = 0.0;       // average W_2^2 between N i.i.d. limit draws at T and the reference law
  double floor_estimate = 0.0;  // same sup error between two independent reference flows
};

struct PocTable {
  std::vector<PocRow> rows;

  /// Columns N, trials, mean_sup_error, std_error, w2sq_mean, floor_estimate.
  void write_csv(std::ostream& os) const;
};

struct PocOptions {
  std::size_t M_ref = 16384;
  std::size_t trials = 8;
  std::size_t probe_particles = 16;
  unsigned threads = 1;
};

/// Synchronous-coupling experiment. For each trial and each N the particle
/// system runs on the trial's ParticleSystem keys; the limit process for
/// probe index i reuses particle i's key (same start, same increments) and
/// sees the frozen reference flow instead of mu^N.
PocTable run_poc(const CoefficientPair& pair, const ConvexSpec& psi, const SchemeConfig& cfg,
                 const InitialCondition& init, std::span<const std::size_t> N_list, const NoiseKey& key_base,
                 double horizon, const PocOptions& opts = {});

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;

  std::string summary() const;
};

enum class PocColumn { MeanSupError, W2sqMean };

/// OLS of ln(y) on ln(x). Throws DegenerateFit with fewer than 3 points or
/// any nonpositive value. r_squared is 1 when ln(y) has no spread.
RateFit fit_loglog(std::span<const double> x, std::span<const double> y);

RateFit fit_rate(const PocTable& table, PocColumn column);

}  // namespace svi
