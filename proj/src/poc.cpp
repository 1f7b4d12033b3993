#include "svi/poc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "svi/csv.hpp"
#include "svi/parallel.hpp"

namespace svi {

namespace {

constexpr std::uint64_t kFloorSalt = 0x5eed'f100'0000'0001ull;

std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial) { return mix64(seed + 0x9e37'79b9'7f4a'7c15ull * trial); }

// sup_k |Xbar^i[a] - Xbar^i[b]| for each probe, driven by two different frozen flows.
double mean_flow_gap(const CoefficientPair& pair, const ConvexSpec& psi, const SchemeConfig& cfg,
                     const InitialCondition& init, std::span<const EmpiricalMeasure> a,
                     std::span<const EmpiricalMeasure> b, const NoiseKey& key, std::size_t probes, double horizon,
                     unsigned threads) {
  std::vector<double> gaps(probes);
  parallel_for(probes, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const NoiseKey k = key.with_particle(i);
      const double x0 = init.sample(k, psi);
      const PathRecord ra = simulate_frozen(pair, psi, cfg, x0, MeasureFlowRef{a}, k, horizon);
      const PathRecord rb = simulate_frozen(pair, psi, cfg, x0, MeasureFlowRef{b}, k, horizon);
      gaps[i] = sup_distance(ra.states, rb.states);
    }
  });
  double s = 0.0;
  for (double g : gaps) s += g;
  return s / static_cast<double>(probes);
}

}  // namespace

void PocTable::write_csv(std::ostream& os) const {
  write_csv_header(os, {"N", "trials", "mean_sup_error", "std_error", "w2sq_mean", "floor_estimate"});
  for (const auto& r : rows)
    write_csv_row(os, {static_cast<double>(r.N), static_cast<double>(r.trials), r.mean_sup_error, r.std_error,
                       r.w2sq_mean, r.floor_estimate});
}

PocTable run_poc(const CoefficientPair& pair, const ConvexSpec& psi, const SchemeConfig& cfg,
                 const InitialCondition& init, std::span<const std::size_t> N_list, const NoiseKey& key_base,
                 double horizon, const PocOptions& opts) {
  if (N_list.empty()) throw ConfigError("run_poc: N_list is empty");
  for (std::size_t k = 0; k < N_list.size(); ++k) {
    if (N_list[k] == 0) throw ConfigError("run_poc: particle counts must be positive");
    if (k > 0 && N_list[k] <= N_list[k - 1]) throw ConfigError("run_poc: N_list must be strictly increasing");
  }
  if (opts.M_ref < N_list.back()) throw ConfigError("run_poc: M_ref must be at least max(N_list)");
  if (opts.trials == 0) throw ConfigError("run_poc: trials must be at least 1");
  if (opts.probe_particles == 0) throw ConfigError("run_poc: probe_particles must be at least 1");

  const auto ref = reference_limit_flow(pair, psi, cfg, init, opts.M_ref, key_base, horizon, opts.threads);
  const auto ref_alt = reference_limit_flow(pair, psi, cfg, init, opts.M_ref,
                                            NoiseKey{mix64(key_base.seed ^ kFloorSalt), 0, StreamTag::LimitProcess},
                                            horizon, opts.threads);
  const NoiseKey first_trial{trial_seed(key_base.seed, 0), 0, StreamTag::ParticleSystem};
  const double floor = mean_flow_gap(pair, psi, cfg, init, ref, ref_alt, first_trial,
                                     opts.probe_particles, horizon, opts.threads);
  const EmpiricalMeasure& ref_T = ref.back();

  PocTable table;
  for (const std::size_t N : N_list) {
    const std::size_t probes = std::min(N, opts.probe_particles);
    std::vector<double> errors;
    errors.reserve(opts.trials * probes);
    double w2_sum = 0.0;
    for (std::size_t trial = 0; trial < opts.trials; ++trial) {
      const NoiseKey key{trial_seed(key_base.seed, trial), 0, StreamTag::ParticleSystem};
      ParticleOptions popts;
      popts.threads = opts.threads;
      popts.record_paths = probes;
      const ParticleEnsemble ens = simulate_particle_system(pair, psi, cfg, init, N, key, horizon, popts);

      std::vector<double> sup(probes);
      parallel_for(probes, opts.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          const PathRecord& xi = ens.records[i];
          const PathRecord bar = simulate_frozen(pair, psi, cfg, xi.states.front(), MeasureFlowRef{ref}, xi.key, horizon);
          if (!(bar.audit == xi.audit)) throw Error("run_poc: coupled processes consumed different noise");
          sup[i] = sup_distance(xi.states, bar.states);
        }
      });
      errors.insert(errors.end(), sup.begin(), sup.end());

      // N i.i.d. draws from the reference law at T, by uniform index into its atoms.
      const auto atoms = ref_T.atoms();
      std::vector<double> draws(N);
      for (std::size_t j = 0; j < N; ++j) {
        const double u = counter_uniform(key, Lane::Resample, j);
        const auto idx = std::min(atoms.size() - 1, static_cast<std::size_t>(u * static_cast<double>(atoms.size())));
        draws[j] = atoms[idx];
      }
      w2_sum += wasserstein_pow(EmpiricalMeasure{std::move(draws)}, ref_T, 2.0);
    }

    PocRow row;
    row.N = N;
    row.trials = opts.trials;
    double mean = 0.0;
    for (double e : errors) mean += e;
    mean /= static_cast<double>(errors.size());
    row.mean_sup_error = mean;
    if (errors.size() > 1) {
      double ss = 0.0;
      for (double e : errors) ss += (e - mean) * (e - mean);
      row.std_error = std::sqrt(ss / static_cast<double>(errors.size() - 1) / static_cast<double>(errors.size()));
    }
    row.w2sq_mean = w2_sum / static_cast<double>(opts.trials);
    row.floor_estimate = floor;
    table.rows.push_back(row);
  }
  return table;
}

std::string RateFit::summary() const {
  std::ostringstream os;
  os << "slope=" << format_double(slope) << " intercept=" << format_double(intercept)
     << " r_squared=" << format_double(r_squared);
  return os.str();
}

RateFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidParams("fit_loglog: x and y differ in length");
  if (x.size() < 3) throw DegenerateFit("rate fit needs at least 3 points");
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DegenerateFit("rate fit needs strictly positive values");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw DegenerateFit("rate fit needs distinct abscissae");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    sse += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  return fit;
}

RateFit fit_rate(const PocTable& table, PocColumn column) {
  std::vector<double> x, y;
  for (const auto& r : table.rows) {
    x.push_back(static_cast<double>(r.N));
    y.push_back(column == PocColumn::MeanSupError ? r.mean_sup_error : r.w2sq_mean);
  }
  return fit_loglog(x, y);
}

}  // namespace svi
