#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "svi/schemes.hpp"

namespace svi {

/// Law of X_0. Draws come from the Initial lane of the particle's own key,
/// so a particle and its coupled limit process start at the same point.
struct InitialCondition {
  enum class Kind { Deterministic, Uniform, Gaussian };
  Kind kind = Kind::Deterministic;
  double p1 = 0.0;  // x0, lower end, or mean
  double p2 = 0.0;  // unused, upper end, or standard deviation
  double a0 = 0.0;  // declared exponential-moment order, 0 when not declared

  static InitialCondition deterministic(double x0) { return {Kind::Deterministic, x0, 0.0, 0.0}; }
  static InitialCondition uniform(double lo, double hi) { return {Kind::Uniform, lo, hi, 0.0}; }
  static InitialCondition gaussian(double mean, double sd) { return {Kind::Gaussian, mean, sd, 0.0}; }

  void validate() const;
  /// Draw projected onto the closure of psi's domain.
  double sample(const NoiseKey& key, const ConvexSpec& psi) const;

  friend bool operator==(const InitialCondition&, const InitialCondition&) = default;
};

struct ParticleOptions {
  unsigned threads = 1;
  /// Full PathRecords are kept for the first `record_paths` particles.
  std::size_t record_paths = std::numeric_limits<std::size_t>::max();
  /// Stream ids per particle; empty means 0..N-1.
  std::vector<std::uint64_t> particle_ids;
};

/// N interacting particles sharing one time grid.
struct ParticleEnsemble {
  std::size_t N = 0;
  std::vector<PathRecord> records;             // first min(N, record_paths) particles
  std::vector<EmpiricalMeasure> measure_flow;  // mu^N at every grid time
  std::vector<double> terminal_states;         // X^{N,i}_T in particle order

  /// Wide CSV with columns t, X_1..X_n over the recorded particles.
  void write_paths_csv(std::ostream& os) const;
};

/// Per grid time: t, mean, var, q05, q50, q95.
void write_flow_summary_csv(std::ostream& os, std::span<const EmpiricalMeasure> flow, double dt);

/// Particle system: at each step mu^N is formed from the current states
/// and every particle advances with that frozen measure and its own stream.
ParticleEnsemble simulate_particle_system(const CoefficientPair& pair, const ConvexSpec& psi, const SchemeConfig& cfg,
                                          const InitialCondition& init, std::size_t N, const NoiseKey& key_base,
                                          double horizon, const ParticleOptions& opts = {});

struct PicardState {
  int iteration = 0;
  std::vector<EmpiricalMeasure> measure_flow;
  double A = 0.0;        // max over grid of mean |X^(k) - X^(k-1)| under shared noise
  double W1_step = 0.0;  // sup over grid of W1(mu^(k), mu^(k-1))
};

struct PicardResult {
  std::vector<EmpiricalMeasure> measure_flow;  // last iterate
  std::vector<PicardState> states;             // one per iteration k = 1..
  bool converged = false;
};

/// Fixed-point iteration in the measure flow: freeze mu^(k), simulate M
/// copies of the SVI with the same noise keys every iteration, rebuild the
/// flow from the copies. Stops once W1_step < tol (or is exactly 0, a
/// fixed point of the discrete map); non-convergence is
/// reported through `converged`, never thrown.
PicardResult picard_solve(const CoefficientPair& pair, const ConvexSpec& psi, const SchemeConfig& cfg,
                          const InitialCondition& init, std::size_t M, int K_max, double tol, const NoiseKey& key_base,
                          double horizon, unsigned threads = 1);

/// Measure flow of a large particle system on the LimitProcess stream tag,
/// standing in for the law of the limit equation.
std::vector<EmpiricalMeasure> reference_limit_flow(const CoefficientPair& pair, const ConvexSpec& psi,
                                                   const SchemeConfig& cfg, const InitialCondition& init,
                                                   std::size_t M_ref, const NoiseKey& key_base, double horizon,
                                                   unsigned threads = 1);

/// sup over the flow of exp_moment(mu_t, a); +inf tag on overflow.
ExtReal sup_exp_moment(std::span<const EmpiricalMeasure> flow, double a);

}  // namespace svi
