#pragma once

#include <cstddef>
#include <vector>

#include "svi/mckean_vlasov.hpp"

namespace svi {

// Coupled convergence studies for measure-free coefficients. Path i uses the
// ParticleSystem stream of particle i under the given seed for both its
// start and its increments, so every compared run sees the same noise.

struct PenalizationStudy {
  std::vector<double> n_list;
  std::vector<std::vector<double>> diffs;  // [path][j]: sup_k |X^{n_j}_k - X^prox_k|

  double mean(std::size_t j) const;
  /// Fraction of paths whose differences are nonincreasing along n_list.
  double nonincreasing_fraction() const;
};

/// Penalized(n) against Proximal at the same dt, for each n.
PenalizationStudy penalization_study(const CoefficientPair& pair, const ConvexSpec& psi, const InitialCondition& init,
                                     double dt, bool taming, double horizon, const std::vector<double>& n_list,
                                     std::size_t paths, std::uint64_t seed, unsigned threads = 1);

struct RefinementStudy {
  std::vector<double> dts;                 // [j]: coarse step of comparison j, halving with j
  std::vector<std::vector<double>> diffs;  // [path][j]: sup over the coarse grid of |X^dt - X^(dt/2)|

  double mean(std::size_t j) const;
};

/// Self-convergence of the scheme in `cfg` from cfg.dt down to
/// cfg.dt / 2^(levels-1); all levels read one dyadic noise grid.
RefinementStudy refinement_study(const CoefficientPair& pair, const ConvexSpec& psi, const SchemeConfig& cfg,
                                 const InitialCondition& init, int levels, double horizon, std::size_t paths,
                                 std::uint64_t seed, unsigned threads = 1);

}  // namespace svi
