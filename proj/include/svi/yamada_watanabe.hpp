#pragma once

#include <span>
#include <vector>

namespace svi {

/// Smooth approximation V of |x| whose second derivative is a weight phi
/// supported on eps/delta <= |x| <= eps.
///
/// The weight is phi(z) = (2 / (z ln delta)) * tent(u(z)) with
/// u(z) = ln(z delta / eps) / ln delta and tent(u) = 1 - |2u - 1|. Under the
/// substitution z -> u the mass of phi is exactly 1, phi <= 2 / (z ln delta),
/// and phi is continuous because the tent vanishes at both ends. V and V'
/// are closed-form piecewise integrals; nothing is integrated numerically.
class YWFunction {
 public:
  double epsilon() const { return eps_; }
  double delta() const { return delta_; }

  double weight(double z) const;
  double value(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const { return weight(x < 0 ? -x : x); }

 private:
  friend YWFunction build_yw(double epsilon, double delta);
  YWFunction(double eps, double delta);

  // Phi(r) = int_0^r phi for r >= 0.
  double weight_mass(double r) const;

  double eps_;
  double delta_;
  double log_delta_;
  double lower_;  // eps / delta
  double value_at_eps_;
};

/// Throws InvalidParams unless 0 < epsilon < 1 and delta > 1 + 1e-9.
YWFunction build_yw(double epsilon, double delta);

/// Elementwise V applied to a difference trajectory.
std::vector<double> yw_apply_path(const YWFunction& f, std::span<const double> diff_path);

}  // namespace svi
