#include "svi/convergence.hpp"

#include <cmath>

#include "svi/parallel.hpp"

namespace svi {

namespace {

double column_mean(const std::vector<std::vector<double>>& rows, std::size_t j) {
  double s = 0.0;
  for (const auto& r : rows) s += r.at(j);
  return rows.empty() ? 0.0 : s / static_cast<double>(rows.size());
}

void require_measure_free(const CoefficientPair& pair) {
  if (pair.declared.measure_dependent) throw InvalidParams("convergence studies need measure-free coefficients");
}

}  // namespace

double PenalizationStudy::mean(std::size_t j) const { return column_mean(diffs, j); }

double PenalizationStudy::nonincreasing_fraction() const {
  if (diffs.empty()) return 0.0;
  std::size_t good = 0;
  for (const auto& r : diffs) {
    bool ok = true;
    for (std::size_t j = 1; j < r.size(); ++j) ok = ok && r[j] <= r[j - 1];
    good += ok;
  }
  return static_cast<double>(good) / static_cast<double>(diffs.size());
}

PenalizationStudy penalization_study(const CoefficientPair& pair, const ConvexSpec& psi, const InitialCondition& init,
                                     double dt, bool taming, double horizon, const std::vector<double>& n_list,
                                     std::size_t paths, std::uint64_t seed, unsigned threads) {
  require_measure_free(pair);
  init.validate();
  const EmpiricalMeasure frozen = EmpiricalMeasure::dirac(0.0);
  const NoiseKey base{seed, 0, StreamTag::ParticleSystem};
  PenalizationStudy out;
  out.n_list = n_list;
  out.diffs.assign(paths, std::vector<double>(n_list.size()));
  parallel_for(paths, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const NoiseKey key = base.with_particle(i);
      const double x0 = init.sample(key, psi);
      const PathRecord prox = simulate_frozen(pair, psi, SchemeConfig::proximal(dt, taming), x0, frozen, key, horizon);
      for (std::size_t j = 0; j < n_list.size(); ++j) {
        const PathRecord pen =
            simulate_frozen(pair, psi, SchemeConfig::penalized(n_list[j], dt, taming), x0, frozen, key, horizon);
        out.diffs[i][j] = sup_distance(pen.states, prox.states);
      }
    }
  });
  return out;
}

double RefinementStudy::mean(std::size_t j) const { return column_mean(diffs, j); }

RefinementStudy refinement_study(const CoefficientPair& pair, const ConvexSpec& psi, const SchemeConfig& cfg,
                                 const InitialCondition& init, int levels, double horizon, std::size_t paths,
                                 std::uint64_t seed, unsigned threads) {
  require_measure_free(pair);
  init.validate();
  if (levels < 2) throw InvalidParams("refinement_study needs at least 2 levels");
  const double dt_fine = std::ldexp(cfg.dt, -(levels - 1));
  const EmpiricalMeasure frozen = EmpiricalMeasure::dirac(0.0);
  const NoiseKey base{seed, 0, StreamTag::ParticleSystem};
  RefinementStudy out;
  for (int j = 0; j + 1 < levels; ++j) out.dts.push_back(std::ldexp(cfg.dt, -j));
  out.diffs.assign(paths, std::vector<double>(out.dts.size()));
  parallel_for(paths, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const NoiseKey key = base.with_particle(i);
      const double x0 = init.sample(key, psi);
      std::vector<std::vector<double>> states;  // by level, coarsest first
      for (int j = 0; j < levels; ++j) {
        SchemeConfig c = cfg;
        c.dt = std::ldexp(cfg.dt, -j);
        const NoiseLevel noise{dt_fine, levels - 1 - j};
        states.push_back(simulate_frozen(pair, psi, c, x0, frozen, key, horizon, noise).states);
      }
      for (std::size_t j = 0; j + 1 < states.size(); ++j) out.diffs[i][j] = sup_distance(states[j], states[j + 1], 1);
    }
  });
  return out;
}

}  // namespace svi
