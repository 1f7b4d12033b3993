#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "svi/coefficients.hpp"

namespace svi {

namespace {

// Shell ratio above which the worst-case quotient is treated as growing
// without bound in |x|.
constexpr double kTrendFactor = 1.5;

struct Sample {
  double t;
  double x;
  double b;
  double s;
};

// Tracks the largest observed quotient lhs / rhs along with its witness.
struct MaxQuotient {
  double value = 0.0;
  std::optional<Witness> at;
  bool unbounded = false;

  void offer(double lhs, double rhs, const Witness& w, double tol) {
    if (rhs <= 0.0) {
      if (lhs > tol && !unbounded) {
        unbounded = true;
        value = std::numeric_limits<double>::infinity();
        at = w;
        at->lhs = lhs;
        at->rhs = rhs;
      }
      return;
    }
    const double q = lhs / rhs;
    if (!unbounded && q > value) {
      value = q;
      at = w;
      at->lhs = lhs;
      at->rhs = rhs;
    }
  }
};

ValidationCheck bound_check(std::string name, const MaxQuotient& q, double declared, double tol) {
  ValidationCheck c;
  c.name = std::move(name);
  c.estimate = q.value;
  c.declared = declared;
  c.passed = !q.unbounded && q.value <= declared * (1.0 + tol) + tol;
  if (!c.passed && q.at) {
    c.witness = q.at;
    c.witness->rhs *= declared;
  }
  if (q.unbounded) c.detail = "left side positive where the bound's right side vanishes";
  return c;
}

std::vector<double> time_points(const SamplingPlan& plan) {
  std::vector<double> ts{0.0};
  if (plan.horizon > 0.0) ts.push_back(plan.horizon);
  for (int j = 0; static_cast<int>(ts.size()) < std::max(plan.t_samples, 1); ++j)
    ts.push_back(plan.horizon * halton(static_cast<std::size_t>(j), 3));
  ts.resize(static_cast<std::size_t>(std::max(plan.t_samples, 1)));
  return ts;
}

std::vector<double> space_points(double radius, int count) {
  std::vector<double> xs{-radius, 0.0, radius};
  for (int i = 0; i < count; ++i) xs.push_back(-radius + 2.0 * radius * halton(static_cast<std::size_t>(i), 2));
  return xs;
}

void check_plan(const SamplingPlan& plan) {
  if (plan.radii.empty()) throw InvalidParams("sampling plan needs at least one radius");
  for (double r : plan.radii)
    if (!(r > 0.0)) throw InvalidParams("sampling radii must be positive");
  if (!std::is_sorted(plan.radii.begin(), plan.radii.end())) throw InvalidParams("sampling radii must be increasing");
  if (plan.x_samples < 1) throw InvalidParams("sampling plan needs x_samples >= 1");
  if (!(plan.horizon >= 0.0)) throw InvalidParams("sampling horizon must be nonnegative");
}

// Max of f over |x| in [lo, hi] at the sampled points.
double shell_max(const std::vector<Sample>& samples, double lo, double hi, double (*f)(const Sample&, double),
                 double param) {
  double m = 0.0;
  for (const auto& s : samples) {
    const double ax = std::abs(s.x);
    if (ax >= lo && ax <= hi) m = std::max(m, f(s, param));
  }
  return m;
}

ValidationCheck trend_check(std::string name, double inner, double outer, double tol) {
  ValidationCheck c;
  c.name = std::move(name);
  c.estimate = inner > tol ? outer / inner : (outer > tol ? std::numeric_limits<double>::infinity() : 1.0);
  c.declared = kTrendFactor;
  c.passed = outer <= kTrendFactor * inner + tol;
  if (!c.passed) {
    std::ostringstream os;
    os << "worst ratio grows from " << inner << " to " << outer << " when the radius doubles";
    c.detail = os.str();
  }
  return c;
}

}  // namespace

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

std::vector<ValidationCheck> ValidationReport::violations() const {
  std::vector<ValidationCheck> out;
  for (const auto& c : checks)
    if (!c.passed) out.push_back(c);
  return out;
}

void ValidationReport::throw_if_violated() const {
  for (const auto& c : checks)
    if (!c.passed) throw AssumptionViolation(c);
}

AssumptionViolation::AssumptionViolation(ValidationCheck check)
    : Error([&] {
        std::ostringstream os;
        os << "assumption violated: " << check.name << " estimate " << check.estimate << " exceeds " << check.declared;
        if (check.witness)
          os << " (witness t=" << check.witness->t << " x=" << check.witness->x << " x'=" << check.witness->x2
             << " lhs=" << check.witness->lhs << " rhs=" << check.witness->rhs << ')';
        return os.str();
      }()),
      check_{std::move(check)} {}

ValidationReport validate_assumption1(const CoefficientPair& pair, const SamplingPlan& plan) {
  check_plan(plan);
  if (pair.declared.measure_dependent || !appears_measure_independent(pair))
    throw InvalidParams("validate_assumption1 applies to measure-independent coefficients only");
  const auto& d = pair.declared;
  const auto dirac = EmpiricalMeasure::dirac(0.0);
  const double tol = plan.tol;
  const double hexp = d.alpha + 0.5;

  ValidationReport rep;
  rep.assumption = "growth and local regularity (SVI)";
  rep.p0_threshold = 4.0 * d.l + 4.0;

  MaxQuotient growth;
  MaxQuotient one_sided;
  std::vector<Sample> outer_samples;
  const auto ts = time_points(plan);

  for (double radius : plan.radii) {
    RadiusEstimate est;
    est.radius = radius;
    MaxQuotient growth_r;
    MaxQuotient one_sided_r;
    std::vector<Sample> samples;
    for (double t : ts) {
      const auto first = samples.size();
      for (double x : space_points(radius, plan.x_samples)) {
        Sample s{t, x, eval_drift(pair, t, x, dirac), eval_diffusion(pair, t, x, dirac)};
        samples.push_back(s);
        const Witness w{.t = t, .x = x, .x2 = x};
        const double g_rhs = 1.0 + std::pow(std::abs(x), d.l + 1.0);
        growth.offer(std::abs(s.b), g_rhs, w, tol);
        growth_r.offer(std::abs(s.b), g_rhs, w, tol);
        const double lhs = std::max(0.0, 2.0 * x * s.b + (d.p0 - 1.0) * s.s * s.s);
        one_sided.offer(lhs, 1.0 + x * x, w, tol);
        one_sided_r.offer(lhs, 1.0 + x * x, w, tol);
      }
      for (auto i = first; i < samples.size(); ++i) {
        for (auto j = i + 1; j < samples.size(); ++j) {
          const double dx = std::abs(samples[i].x - samples[j].x);
          if (dx < 1e-6 || dx > 2.0 * radius) continue;
          est.lipschitz_drift = std::max(est.lipschitz_drift, std::abs(samples[i].b - samples[j].b) / dx);
          est.hoelder_diffusion =
              std::max(est.hoelder_diffusion, std::abs(samples[i].s - samples[j].s) / std::pow(dx, hexp));
        }
      }
    }
    est.growth_constant = growth_r.value;
    est.dissipativity_constant = one_sided_r.value;
    rep.per_radius.push_back(est);
    outer_samples = std::move(samples);
  }

  rep.checks.push_back(bound_check("drift_growth", growth, d.C, tol));
  rep.checks.push_back(bound_check("one_sided_growth", one_sided, d.C, tol));

  const double rmax = plan.radii.back();
  auto growth_ratio = [](const Sample& s, double l) { return std::abs(s.b) / (1.0 + std::pow(std::abs(s.x), l + 1.0)); };
  rep.checks.push_back(trend_check("drift_growth_trend", shell_max(outer_samples, rmax / 4, rmax / 2, growth_ratio, d.l),
                                   shell_max(outer_samples, rmax / 2, rmax, growth_ratio, d.l), tol));

  {
    ValidationCheck c;
    c.name = "drift_local_lipschitz";
    c.estimate = rep.per_radius.back().lipschitz_drift;
    c.declared = std::numeric_limits<double>::infinity();
    c.passed = std::isfinite(c.estimate);
    rep.checks.push_back(c);
  }

  {
    // Local probe: the Hoelder quotient must not blow up as the gap shrinks.
    ValidationCheck c;
    c.name = "diffusion_local_hoelder";
    c.estimate = rep.per_radius.back().hoelder_diffusion;
    c.declared = std::numeric_limits<double>::infinity();
    const double t0 = ts.front();
    for (const auto& s : outer_samples) {
      if (s.t != t0) continue;
      for (double dir : {-1.0, 1.0}) {
        auto quotient = [&](double h) {
          const double sv = eval_diffusion(pair, t0, s.x + dir * h, dirac);
          return std::abs(sv - s.s) / std::pow(h, hexp);
        };
        const double coarse = quotient(1e-2);
        const double fine = quotient(1e-8);
        if (fine > 10.0 * coarse + 1e-6 && c.passed) {
          c.passed = false;
          c.witness = Witness{.t = t0, .x = s.x, .x2 = s.x + dir * 1e-8, .lhs = fine, .rhs = coarse};
          c.detail = "Hoelder quotient grows as the gap shrinks; exponent alpha + 1/2 too large";
        }
      }
    }
    rep.checks.push_back(c);
  }

  {
    ValidationCheck c;
    c.name = "p0_threshold";
    c.estimate = d.p0;
    c.declared = rep.p0_threshold;
    c.passed = d.p0 >= rep.p0_threshold;
    if (!c.passed) c.detail = "declared p0 below 4l + 4";
    rep.checks.push_back(c);
  }
  return rep;
}

ValidationReport validate_assumption2(const CoefficientPair& pair, const SamplingPlan& plan,
                                      const MeasureSampler& sampler) {
  check_plan(plan);
  if (!sampler) throw InvalidParams("validate_assumption2 requires a measure sampler");
  const auto& d = pair.declared;
  const double tol = plan.tol;

  ValidationReport rep;
  rep.assumption = "mean-field growth and regularity (MVSVI)";
  rep.p0_threshold = 1.0;

  MaxQuotient dissip;
  MaxQuotient growth;
  MaxQuotient lip;
  MaxQuotient bounded;
  MaxQuotient hoelder;
  std::vector<double> sigma_sq_max;

  std::size_t mu_counter = 0;
  for (double radius : plan.radii) {
    RadiusEstimate est;
    est.radius = radius;
    double s2max = 0.0;
    const auto n = static_cast<std::size_t>(plan.x_samples);
    for (std::size_t i = 0; i < n + 3; ++i) {
      double x;
      double x2;
      double t;
      if (i < n) {
        x = -radius + 2.0 * radius * halton(i, 2);
        x2 = -radius + 2.0 * radius * halton(i, 5);
        t = plan.horizon * halton(i, 3);
      } else {
        // corners: coincident points, and the two ends of the radius
        const double corner[3][2] = {{0.0, 0.0}, {radius, -radius}, {-radius, radius}};
        x = corner[i - n][0];
        x2 = corner[i - n][1];
        t = plan.horizon;
      }
      const std::size_t mi = mu_counter++;
      const std::size_t mj = i == n ? mi : mu_counter++;
      const auto mu = sampler(mi);
      const auto mu2 = sampler(mj);
      const double b = eval_drift(pair, t, x, mu);
      const double b2 = eval_drift(pair, t, x2, mu2);
      const double s = eval_diffusion(pair, t, x, mu);
      const double s2 = eval_diffusion(pair, t, x2, mu2);
      const double w1 = wasserstein(mu, mu2, 1.0);
      const double w10 = w1_to_dirac0(mu);
      const double mom = moment(mu, d.p0) + moment(mu2, d.p0);
      const double dx = std::abs(x - x2);
      const Witness w{.t = t, .x = x, .x2 = x2, .mu_index = mi, .mu2_index = mj};

      dissip.offer(std::max(0.0, x * b), 1.0 + x * x, w, tol);
      growth.offer(std::abs(b), 1.0 + std::pow(std::abs(x), d.l + 1.0) + w10, w, tol);
      const double weight = 1.0 + std::abs(x) + std::abs(x2) + mom;
      lip.offer(std::abs(b - b2), weight * (dx + w1), w, tol);
      bounded.offer(s * s, 1.0, w, tol);
      hoelder.offer((s - s2) * (s - s2), weight * (std::pow(dx, 1.0 + 2.0 * d.alpha) + dx * w1), w, tol);
      s2max = std::max({s2max, s * s, s2 * s2});
      est.growth_constant = std::max(est.growth_constant, std::abs(b) / (1.0 + std::pow(std::abs(x), d.l + 1.0) + w10));
      est.dissipativity_constant = std::max(est.dissipativity_constant, std::max(0.0, x * b) / (1.0 + x * x));
      if (dx > 0.0) est.lipschitz_drift = std::max(est.lipschitz_drift, std::abs(b - b2) / (dx + w1));
    }
    sigma_sq_max.push_back(s2max);
    rep.per_radius.push_back(est);
  }

  rep.checks.push_back(bound_check("drift_dissipativity", dissip, d.C, tol));
  rep.checks.push_back(bound_check("drift_growth", growth, d.C, tol));
  rep.checks.push_back(bound_check("drift_lipschitz", lip, d.C, tol));
  rep.checks.push_back(bound_check("diffusion_bounded", bounded, d.C, tol));
  if (sigma_sq_max.size() >= 2)
    rep.checks.push_back(trend_check("diffusion_bounded_trend", sigma_sq_max[sigma_sq_max.size() - 2],
                                     sigma_sq_max.back(), tol));
  rep.checks.push_back(bound_check("diffusion_hoelder", hoelder, d.C, tol));
  {
    ValidationCheck c;
    c.name = "p0_threshold";
    c.estimate = d.p0;
    c.declared = 1.0;
    c.passed = d.p0 >= 1.0;
    rep.checks.push_back(c);
  }
  return rep;
}

}  // namespace svi
