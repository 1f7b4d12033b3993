#include "svi/schemes.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "svi/csv.hpp"

namespace svi {

namespace {

double tamed(double b, const SchemeConfig& cfg) { return cfg.taming ? b / (1.0 + cfg.dt * std::abs(b)) : b; }

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NonFinite(std::string(what) + " produced a non-finite state");
}

}  // namespace

void SchemeConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidParams("scheme dt must be positive");
  if (kind == SchemeKind::Penalized) {
    if (!(n > 0.0) || !std::isfinite(n)) throw InvalidParams("penalized scheme requires n > 0");
    if (n * dt > 2.0) throw InvalidParams("penalized scheme requires n * dt <= 2");
  }
}

StepResult step_penalized(double x, double t, const EmpiricalMeasure& mu, const CoefficientPair& pair,
                          const YosidaView& view, const SchemeConfig& cfg, double dB) {
  const double drift = tamed(eval_drift(pair, t, x, mu), cfg) * cfg.dt;
  const double noise = eval_diffusion(pair, t, x, mu) * dB;
  const double dphi = yosida_gradient(view, x) * cfg.dt;
  const double next = x + drift + noise - dphi;
  require_finite(next, "penalized step");
  return {next, dphi, drift, noise};
}

StepResult step_proximal(double x, double t, const EmpiricalMeasure& mu, const CoefficientPair& pair,
                         const ConvexSpec& psi, const SchemeConfig& cfg, double dB) {
  const double drift = tamed(eval_drift(pair, t, x, mu), cfg) * cfg.dt;
  const double noise = eval_diffusion(pair, t, x, mu) * dB;
  const double y = x + drift + noise;
  const double next = resolvent(psi, cfg.dt, y);
  require_finite(next, "proximal step");
  return {next, y - next, drift, noise};
}

const EmpiricalMeasure& MeasureFlowRef::at(std::size_t step) const {
  if (constant_) return *constant_;
  if (step >= flow_.size()) throw OutOfRange("measure flow not defined at requested grid index");
  return flow_[step];
}

std::size_t MeasureFlowRef::size() const {
  return constant_ ? std::numeric_limits<std::size_t>::max() : flow_.size();
}

void PathRecord::reserve(std::size_t steps) {
  for (auto* v : {&times, &states, &phi, &var_phi, &drift_integral, &noise_integral}) v->reserve(steps + 1);
}

void PathRecord::start(double x0) {
  times.assign(1, 0.0);
  states.assign(1, x0);
  phi.assign(1, 0.0);
  var_phi.assign(1, 0.0);
  drift_integral.assign(1, 0.0);
  noise_integral.assign(1, 0.0);
}

void PathRecord::push(double t, const StepResult& r) {
  times.push_back(t);
  states.push_back(r.x_next);
  phi.push_back(phi.back() + r.dphi);
  var_phi.push_back(var_phi.back() + std::abs(r.dphi));
  drift_integral.push_back(drift_integral.back() + r.drift_term);
  noise_integral.push_back(noise_integral.back() + r.noise_term);
}

void PathRecord::write_csv(std::ostream& os) const {
  write_csv_header(os, {"t", "X", "phi", "var_phi"});
  for (std::size_t k = 0; k < states.size(); ++k) write_csv_row(os, {times[k], states[k], phi[k], var_phi[k]});
}

IncrementGrid make_grid(const SchemeConfig& cfg, double horizon, const NoiseLevel& noise) {
  if (noise.dt_fine == 0.0) {
    if (noise.level != 0) throw InvalidParams("noise level requires an explicit fine step");
    return IncrementGrid{horizon, cfg.dt};
  }
  IncrementGrid grid{horizon, noise.dt_fine};
  if (std::abs(grid.dt(noise.level) - cfg.dt) > 1e-12 * cfg.dt)
    throw InvalidParams("scheme dt does not match the noise grid at the requested level");
  return grid;
}

PathRecord simulate_frozen(const CoefficientPair& pair, const ConvexSpec& psi, const SchemeConfig& cfg, double x0,
                           const MeasureFlowRef& flow, const NoiseKey& key, double horizon, const NoiseLevel& noise) {
  cfg.validate();
  const IncrementGrid grid = make_grid(cfg, horizon, noise);
  const std::size_t steps = grid.steps(noise.level);
  if (flow.size() < steps) throw InvalidParams("measure flow shorter than the time grid");

  std::optional<YosidaView> view;
  if (cfg.kind == SchemeKind::Penalized) view.emplace(psi, cfg.n);

  PathRecord rec;
  rec.key = key;
  rec.reserve(steps);
  rec.start(x0);
  double x = x0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    const double dB = grid.increment(key, noise.level, k);
    rec.audit.consume(dB);
    const auto& mu = flow.at(k);
    const StepResult r = view ? step_penalized(x, t, mu, pair, *view, cfg, dB) : step_proximal(x, t, mu, pair, psi, cfg, dB);
    rec.push(static_cast<double>(k + 1) * cfg.dt, r);
    x = r.x_next;
  }
  return rec;
}

double sup_distance(std::span<const double> a, std::span<const double> b, int stride_log2) {
  const std::size_t stride = std::size_t{1} << stride_log2;
  if (a.empty() || (a.size() - 1) * stride != b.size() - 1)
    throw InvalidParams("sup_distance: grids are not nested at the requested stride");
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k * stride]));
  return m;
}

}  // namespace svi
