#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "svi/extended_real.hpp"

namespace svi {

// Catalog of convex functions on the real line. Every entry satisfies
// psi(x) >= psi(0) = 0 and the factories reject parameters that break this.
// 0 lies in the interior of the subdifferential's domain, except that an
// indicator interval may have 0 as an endpoint, as in [0, inf).

/// Indicator of [lo, hi]: 0 inside, +inf outside.
struct IndicatorInterval {
  ExtReal lo;
  ExtReal hi;
};

/// scale * |x|
struct AbsValue {
  double scale;
};

/// (curvature / 2) * x^2
struct Quadratic {
  double curvature;
};

/// scale * x^exponent, exponent even.
struct EvenPower {
  int exponent;
  double scale;
};

struct AffinePiece {
  double slope;
  double intercept;
};

/// max_i (slope_i * x + intercept_i)
struct MaxAffine {
  std::vector<AffinePiece> pieces;  // upper envelope only, slopes strictly increasing
  std::vector<double> breaks;       // breaks[i] separates pieces[i] and pieces[i+1]
};

/// User-supplied convex function. Values outside `domain` are treated as +inf.
struct Custom {
  std::string label;
  std::function<double(double)> value;
  std::function<std::optional<ClosedInterval>(double)> subgradient;
  ClosedInterval domain;
};

class ConvexSpec {
 public:
  using Kind = std::variant<IndicatorInterval, AbsValue, Quadratic, EvenPower, MaxAffine, Custom>;

  static ConvexSpec indicator(ExtReal lo, ExtReal hi);
  /// psi == 0 everywhere (indicator of the whole line).
  static ConvexSpec zero();
  static ConvexSpec abs_value(double scale);
  static ConvexSpec quadratic(double curvature);
  static ConvexSpec even_power(int exponent, double scale);
  static ConvexSpec max_affine(std::vector<AffinePiece> pieces);
  static ConvexSpec custom(Custom fn);

  const Kind& kind() const { return kind_; }

  /// Closure of D(subdifferential).
  const ClosedInterval& domain() const { return domain_; }

  /// A point in the interior of the domain: 0 when 0 is interior, otherwise
  /// a point next to the minimizer 0 on the boundary.
  double interior_anchor() const;

  /// psi(x); +inf (tagged) outside the domain.
  ExtReal value(double x) const;

  /// True when psi vanishes identically.
  bool is_zero() const;

  std::string describe() const;

 private:
  ConvexSpec(Kind k, ClosedInterval dom) : kind_{std::move(k)}, domain_{dom} {}

  Kind kind_;
  ClosedInterval domain_;
};

/// Controls the bisection used by resolvents without a closed form.
struct ResolventOptions {
  double tol = 1e-12;
  int max_iter = 200;
};

/// {z : (x' - x) z <= psi(x') - psi(x) for all x'}; nullopt when x is
/// outside D(subdifferential).
std::optional<ClosedInterval> subdifferential_interval(const ConvexSpec& psi, double x);

/// argmin_{x'} (1 / 2 lambda)(x' - x)^2 + psi(x').
/// Throws InvalidParams for lambda <= 0 and NonConvergence if bisection
/// cannot bracket the root.
double resolvent(const ConvexSpec& psi, double lambda, double x, const ResolventOptions& opts = {});

/// Euclidean projection onto the closure of the domain.
double project_domain(const ConvexSpec& psi, double x);

/// psi viewed through its Moreau-Yosida regularization with parameter n.
struct YosidaView {
  ConvexSpec base;
  double n;

  YosidaView(ConvexSpec psi, double n);

  /// J_n x, the resolvent with lambda = 1/n.
  double resolvent(double x) const { return svi::resolvent(base, 1.0 / n, x); }
};

/// psi^n(x) = (n/2)(x - J_n x)^2 + psi(J_n x).
double moreau_envelope(const YosidaView& view, double x);

/// grad psi^n(x) = n (x - J_n x); Lipschitz with constant n.
double yosida_gradient(const YosidaView& view, double x);

}  // namespace svi
