#include "svi/yamada_watanabe.hpp"

#include <cmath>

#include "svi/errors.hpp"

namespace svi {

namespace {

// int_0^u e^{L w} dw
double exp_integral0(double L, double u) { return std::expm1(L * u) / L; }

// int_0^u w e^{L w} dw; power series when L u is small to dodge cancellation.
double exp_integral1(double L, double u) {
  const double lu = L * u;
  if (std::abs(lu) < 0.5) {
    double term = 1.0;  // (L u)^m / m!
    double sum = 0.0;
    for (int m = 0; m < 30; ++m) {
      sum += term / (m + 2);
      term *= lu / (m + 1);
    }
    return u * u * sum;
  }
  return (u * std::exp(lu) - exp_integral0(L, u)) / L;
}

// int_0^u tent(w) e^{L w} dw with tent(w) = 1 - |2w - 1|.
double tent_exp_integral(double L, double u) {
  if (u <= 0.5) return 2.0 * exp_integral1(L, u);
  const double e0h = exp_integral0(L, 0.5);
  const double e1h = exp_integral1(L, 0.5);
  return 4.0 * e1h - 2.0 * e0h + 2.0 * exp_integral0(L, u) - 2.0 * exp_integral1(L, u);
}

double tent(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  return 1.0 - std::abs(2.0 * u - 1.0);
}

}  // namespace

YWFunction::YWFunction(double eps, double delta)
    : eps_{eps}, delta_{delta}, log_delta_{std::log(delta)}, lower_{eps / delta}, value_at_eps_{0.0} {
  value_at_eps_ = eps_ - 2.0 * lower_ * tent_exp_integral(log_delta_, 1.0);
}

YWFunction build_yw(double epsilon, double delta) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidParams("Yamada-Watanabe requires 0 < epsilon < 1");
  if (!(delta > 1.0 + 1e-9) || !std::isfinite(delta)) throw InvalidParams("Yamada-Watanabe requires delta > 1 + 1e-9");
  return YWFunction{epsilon, delta};
}

double YWFunction::weight(double z) const {
  if (z < lower_ || z > eps_) return 0.0;
  const double u = std::log(z / lower_) / log_delta_;
  return 2.0 / (z * log_delta_) * tent(u);
}

double YWFunction::weight_mass(double r) const {
  if (r <= lower_) return 0.0;
  if (r >= eps_) return 1.0;
  const double u = std::log(r / lower_) / log_delta_;
  return u <= 0.5 ? 2.0 * u * u : 4.0 * u - 2.0 * u * u - 1.0;
}

double YWFunction::value(double x) const {
  const double r = std::abs(x);
  if (r <= lower_) return 0.0;
  if (r >= eps_) return value_at_eps_ + (r - eps_);
  const double u = std::log(r / lower_) / log_delta_;
  // int_a^r Phi = r Phi(r) - int_a^r s phi(s) ds, and s phi(s) ds = 2 a tent(u) e^{L u} du
  return r * weight_mass(r) - 2.0 * lower_ * tent_exp_integral(log_delta_, u);
}

double YWFunction::derivative(double x) const {
  const double m = weight_mass(std::abs(x));
  return x < 0 ? -m : m;
}

std::vector<double> yw_apply_path(const YWFunction& f, std::span<const double> diff_path) {
  std::vector<double> out;
  out.reserve(diff_path.size());
  for (double d : diff_path) out.push_back(f.value(d));
  return out;
}

}  // namespace svi
