#include "svi/mckean_vlasov.hpp"

#include <cmath>
#include <optional>

#include "svi/csv.hpp"
#include "svi/parallel.hpp"

namespace svi {

namespace {

// Dispatches to the configured one-step rule; the Yosida view is built once.
class Stepper {
 public:
  Stepper(const CoefficientPair& pair, const ConvexSpec& psi, const SchemeConfig& cfg)
      : pair_{pair}, psi_{psi}, cfg_{cfg} {
    if (cfg.kind == SchemeKind::Penalized) view_.emplace(psi, cfg.n);
  }

  StepResult operator()(double x, double t, const EmpiricalMeasure& mu, double dB) const {
    return view_ ? step_penalized(x, t, mu, pair_, *view_, cfg_, dB) : step_proximal(x, t, mu, pair_, psi_, cfg_, dB);
  }

 private:
  const CoefficientPair& pair_;
  const ConvexSpec& psi_;
  const SchemeConfig& cfg_;
  std::optional<YosidaView> view_;
};

}  // namespace

void InitialCondition::validate() const {
  if (!std::isfinite(p1) || !std::isfinite(p2)) throw InvalidParams("initial condition parameters must be finite");
  if (kind == Kind::Uniform && !(p1 < p2)) throw InvalidParams("uniform initial condition requires lo < hi");
  if (kind == Kind::Gaussian && !(p2 >= 0.0)) throw InvalidParams("gaussian initial condition requires sd >= 0");
  if (!(a0 >= 0.0)) throw InvalidParams("a0 must be nonnegative");
}

double InitialCondition::sample(const NoiseKey& key, const ConvexSpec& psi) const {
  double x = p1;
  switch (kind) {
    case Kind::Deterministic: break;
    case Kind::Uniform: x = p1 + (p2 - p1) * counter_uniform(key, Lane::Initial, 0); break;
    case Kind::Gaussian: x = p1 + p2 * counter_normal(key, Lane::Initial, 0); break;
  }
  return project_domain(psi, x);
}

void ParticleEnsemble::write_paths_csv(std::ostream& os) const {
  std::vector<std::string> cols{"t"};
  for (std::size_t i = 0; i < records.size(); ++i) cols.push_back("X_" + std::to_string(i + 1));
  write_csv_header(os, cols);
  if (records.empty()) return;
  std::vector<double> row;
  for (std::size_t k = 0; k < records.front().states.size(); ++k) {
    row.assign(1, records.front().times[k]);
    for (const auto& r : records) row.push_back(r.states[k]);
    write_csv_row(os, row);
  }
}

void write_flow_summary_csv(std::ostream& os, std::span<const EmpiricalMeasure> flow, double dt) {
  write_csv_header(os, {"t", "mean", "var", "q05", "q50", "q95"});
  for (std::size_t k = 0; k < flow.size(); ++k) {
    const auto& mu = flow[k];
    write_csv_row(os, {static_cast<double>(k) * dt, mu.mean(), mu.variance(), mu.quantile(0.05), mu.quantile(0.5),
                       mu.quantile(0.95)});
  }
}

ParticleEnsemble simulate_particle_system(const CoefficientPair& pair, const ConvexSpec& psi, const SchemeConfig& cfg,
                                          const InitialCondition& init, std::size_t N, const NoiseKey& key_base,
                                          double horizon, const ParticleOptions& opts) {
  cfg.validate();
  init.validate();
  if (N == 0) throw InvalidParams("particle system requires N >= 1");
  if (!opts.particle_ids.empty() && opts.particle_ids.size() != N)
    throw InvalidParams("particle_ids must list exactly N stream ids");
  const IncrementGrid grid{horizon, cfg.dt};
  const std::size_t steps = grid.steps();
  const Stepper step{pair, psi, cfg};

  std::vector<NoiseKey> keys(N);
  for (std::size_t i = 0; i < N; ++i)
    keys[i] = key_base.with_particle(opts.particle_ids.empty() ? i : opts.particle_ids[i]);

  std::vector<double> x(N);
  for (std::size_t i = 0; i < N; ++i) x[i] = init.sample(keys[i], psi);

  ParticleEnsemble ens;
  ens.N = N;
  const std::size_t nrec = std::min(N, opts.record_paths);
  ens.records.resize(nrec);
  for (std::size_t i = 0; i < nrec; ++i) {
    ens.records[i].key = keys[i];
    ens.records[i].reserve(steps);
    ens.records[i].start(x[i]);
  }
  ens.measure_flow.reserve(steps + 1);

  for (std::size_t k = 0; k < steps; ++k) {
    ens.measure_flow.emplace_back(x);
    const EmpiricalMeasure& mu = ens.measure_flow.back();
    const double t = static_cast<double>(k) * cfg.dt;
    const double t_next = static_cast<double>(k + 1) * cfg.dt;
    parallel_for(N, opts.threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        const double dB = grid.increment(keys[i], 0, k);
        const StepResult r = step(x[i], t, mu, dB);
        x[i] = r.x_next;
        if (i < nrec) {
          ens.records[i].audit.consume(dB);
          ens.records[i].push(t_next, r);
        }
      }
    });
  }
  ens.measure_flow.emplace_back(x);
  ens.terminal_states = std::move(x);
  return ens;
}

PicardResult picard_solve(const CoefficientPair& pair, const ConvexSpec& psi, const SchemeConfig& cfg,
                          const InitialCondition& init, std::size_t M, int K_max, double tol, const NoiseKey& key_base,
                          double horizon, unsigned threads) {
  cfg.validate();
  init.validate();
  if (M < 2) throw InvalidParams("picard_solve requires M >= 2");
  if (K_max < 1) throw InvalidParams("picard_solve requires K_max >= 1");
  if (!(tol >= 0.0)) throw InvalidParams("picard_solve requires tol >= 0");
  const IncrementGrid grid{horizon, cfg.dt};
  const std::size_t steps = grid.steps();
  const std::size_t width = steps + 1;
  const Stepper step{pair, psi, cfg};

  const NoiseKey shared{key_base.seed, 0, StreamTag::PicardShared};
  std::vector<double> x0(M);
  for (std::size_t j = 0; j < M; ++j) x0[j] = init.sample(shared.with_particle(j), psi);

  // X^(0)_t = X_0 for every t.
  std::vector<double> prev(M * width);
  for (std::size_t j = 0; j < M; ++j) std::fill_n(prev.begin() + static_cast<std::ptrdiff_t>(j * width), width, x0[j]);
  std::vector<EmpiricalMeasure> prev_flow(width, EmpiricalMeasure{x0});

  PicardResult result;
  std::vector<double> next(M * width);
  std::vector<double> column(M);
  for (int k = 1; k <= K_max; ++k) {
    parallel_for(M, threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t j = begin; j < end; ++j) {
        const NoiseKey key = shared.with_particle(j);
        double* path = next.data() + j * width;
        double x = x0[j];
        path[0] = x;
        for (std::size_t s = 0; s < steps; ++s) {
          x = step(x, static_cast<double>(s) * cfg.dt, prev_flow[s], grid.increment(key, 0, s)).x_next;
          path[s + 1] = x;
        }
      }
    });

    PicardState st;
    st.iteration = k;
    st.measure_flow.reserve(width);
    for (std::size_t s = 0; s < width; ++s) {
      double mean_gap = 0.0;
      for (std::size_t j = 0; j < M; ++j) {
        column[j] = next[j * width + s];
        mean_gap += std::abs(column[j] - prev[j * width + s]);
      }
      st.A = std::max(st.A, mean_gap / static_cast<double>(M));
      st.measure_flow.emplace_back(column);
      st.W1_step = std::max(st.W1_step, wasserstein(st.measure_flow.back(), prev_flow[s], 1.0));
    }
    prev_flow = st.measure_flow;
    std::swap(prev, next);
    const bool done = st.W1_step < tol || st.W1_step == 0.0;
    result.states.push_back(std::move(st));
    if (done) {
      result.converged = true;
      break;
    }
  }
  result.measure_flow = prev_flow;
  return result;
}

std::vector<EmpiricalMeasure> reference_limit_flow(const CoefficientPair& pair, const ConvexSpec& psi,
                                                   const SchemeConfig& cfg, const InitialCondition& init,
                                                   std::size_t M_ref, const NoiseKey& key_base, double horizon,
                                                   unsigned threads) {
  if (M_ref < 1) throw InvalidParams("reference_limit_flow requires M_ref >= 1");
  const NoiseKey key{key_base.seed, 0, StreamTag::LimitProcess};
  ParticleOptions opts;
  opts.threads = threads;
  opts.record_paths = 0;
  return simulate_particle_system(pair, psi, cfg, init, M_ref, key, horizon, opts).measure_flow;
}

ExtReal sup_exp_moment(std::span<const EmpiricalMeasure> flow, double a) {
  ExtReal best{0.0};
  for (const auto& mu : flow) {
    const ExtReal v = exp_moment(mu, a);
    if (v.is_pos_inf()) return v;
    if (v > best) best = v;
  }
  return best;
}

}  // namespace svi
