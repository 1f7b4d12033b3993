#include "svi/coefficients.hpp"

#include <cmath>

#include "svi/noise.hpp"

namespace svi {

namespace {

double checked(double v, const char* what, const std::string& name, double t, double x) {
  if (!std::isfinite(v))
    throw NonFinite(std::string(what) + " of '" + name + "' is not finite at t=" + std::to_string(t) +
                    ", x=" + std::to_string(x));
  return v;
}

}  // namespace

double eval_drift(const CoefficientPair& pair, double t, double x, const EmpiricalMeasure& mu) {
  return checked(pair.drift(t, x, mu), "drift", pair.name, t, x);
}

double eval_diffusion(const CoefficientPair& pair, double t, double x, const EmpiricalMeasure& mu) {
  return checked(pair.diffusion(t, x, mu), "diffusion", pair.name, t, x);
}

double MeanFieldKernel::operator()(double x, const EmpiricalMeasure& mu) const {
  double v = self_term ? self_term(x) : 0.0;
  if (interaction) {
    double s = 0.0;
    for (double y : mu.atoms()) s += interaction(x, y);
    v += s / static_cast<double>(mu.size());
  }
  return v;
}

CoefficientPair toy_cubic(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 0.5)) throw InvalidParams("toy_cubic requires alpha in [0, 1/2]");
  const double expo = 0.5 + alpha;
  CoefficientPair p;
  p.name = "toy_cubic";
  p.drift = [](double, double x, const EmpiricalMeasure&) { return x - 2.0 * x * x * x; };
  if (alpha == 0.0) {
    p.diffusion = [](double, double x, const EmpiricalMeasure&) { return std::sqrt(std::abs(x * x + x)); };
  } else {
    p.diffusion = [expo](double, double x, const EmpiricalMeasure&) { return std::pow(std::abs(x * x + x), expo); };
  }
  // l = 2 and p0 = 4l + 4; C covers the one-sided bound max ~10.006 on |x| <= 10
  p.declared = DeclaredConstants{.C = 12.0, .l = 2.0, .alpha = alpha, .p0 = 12.0, .measure_dependent = false};
  return p;
}

CoefficientPair ou_meanfield(double sigma) {
  if (!std::isfinite(sigma)) throw InvalidParams("ou_meanfield requires a finite sigma");
  CoefficientPair p;
  p.name = "ou_meanfield";
  p.drift = [](double, double x, const EmpiricalMeasure& mu) { return -x + mu.mean(); };
  p.diffusion = [sigma](double, double, const EmpiricalMeasure&) { return sigma; };
  // x b <= |x| R - x^2 <= R^2 / 4 for measures supported in [-R, R], R = 10
  p.declared = DeclaredConstants{.C = std::max(25.0, sigma * sigma), .l = 1.0, .alpha = 0.5, .p0 = 2.0,
                                 .measure_dependent = true};
  return p;
}

CoefficientPair cir_like(double kappa, double theta) {
  if (!(kappa >= 0.0) || !std::isfinite(theta)) throw InvalidParams("cir_like requires kappa >= 0 and finite theta");
  CoefficientPair p;
  p.name = "cir_like";
  p.drift = [kappa, theta](double, double x, const EmpiricalMeasure&) { return kappa * (theta - x); };
  p.diffusion = [](double, double x, const EmpiricalMeasure&) { return std::sqrt(std::max(x, 0.0)); };
  const double c = 4.0 * std::max({1.0, kappa, kappa * std::abs(theta)});
  p.declared = DeclaredConstants{.C = c, .l = 1.0, .alpha = 0.0, .p0 = 8.0, .measure_dependent = false};
  return p;
}

CoefficientPair constant_pair(double drift, double diffusion) {
  CoefficientPair p;
  p.name = "constant";
  p.drift = [drift](double, double, const EmpiricalMeasure&) { return drift; };
  p.diffusion = [diffusion](double, double, const EmpiricalMeasure&) { return diffusion; };
  p.declared = DeclaredConstants{.C = std::max({1.0, std::abs(drift), diffusion * diffusion}), .l = 1.0,
                                 .alpha = 0.5, .p0 = 8.0, .measure_dependent = false};
  return p;
}

CoefficientPair from_kernels(std::string name, MeanFieldKernel drift, MeanFieldKernel diffusion,
                             DeclaredConstants declared) {
  CoefficientPair p;
  p.name = std::move(name);
  p.drift = [k = std::move(drift)](double, double x, const EmpiricalMeasure& mu) { return k(x, mu); };
  p.diffusion = [k = std::move(diffusion)](double, double x, const EmpiricalMeasure& mu) { return k(x, mu); };
  declared.measure_dependent = true;
  p.declared = declared;
  return p;
}

CoefficientPair from_expressions(std::string_view drift, std::string_view diffusion, DeclaredConstants declared) {
  auto b = Expression::parse(drift);
  auto s = Expression::parse(diffusion);
  CoefficientPair p;
  p.name = "custom";
  declared.measure_dependent = b.uses_measure() || s.uses_measure();
  p.drift = [b](double t, double x, const EmpiricalMeasure& mu) { return b.eval(t, x, mu); };
  p.diffusion = [s](double t, double x, const EmpiricalMeasure& mu) { return s.eval(t, x, mu); };
  p.declared = declared;
  return p;
}

bool appears_measure_independent(const CoefficientPair& pair) {
  auto sampler = default_measure_sampler(5.0, 1234);
  const auto mu = sampler(0);
  const auto nu = sampler(1);
  for (double x : {-2.0, -0.3, 0.0, 0.7, 3.0}) {
    for (double t : {0.0, 0.5}) {
      if (pair.drift(t, x, mu) != pair.drift(t, x, nu)) return false;
      if (pair.diffusion(t, x, mu) != pair.diffusion(t, x, nu)) return false;
    }
  }
  return true;
}

double halton(std::size_t index, unsigned base) {
  double f = 1.0;
  double r = 0.0;
  std::size_t i = index + 1;  // skip the zero point
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

MeasureSampler default_measure_sampler(double radius, std::uint64_t seed) {
  return [radius, seed](std::size_t index) {
    const NoiseKey key{seed, static_cast<std::uint64_t>(index), StreamTag::LimitProcess};
    const auto n = 1 + static_cast<std::size_t>(8.0 * counter_uniform(key, Lane::Resample, 0));
    std::vector<double> atoms;
    atoms.reserve(n);
    for (std::size_t j = 0; j < n; ++j) atoms.push_back(radius * (2.0 * counter_uniform(key, Lane::Resample, j + 1) - 1.0));
    return EmpiricalMeasure{std::move(atoms)};
  };
}

}  // namespace svi
