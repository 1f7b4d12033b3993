#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "svi/convex.hpp"

namespace svi::testing {

struct NamedPsi {
  std::string name;
  ConvexSpec psi;
};

// 1 - sqrt(1 - x^2) on [-1, 1]; the subdifferential is empty at +-1.
inline ConvexSpec circle_cap() {
  Custom c;
  c.label = "circle_cap";
  c.value = [](double x) { return 1.0 - std::sqrt(std::max(0.0, 1.0 - x * x)); };
  c.subgradient = [](double x) -> std::optional<ClosedInterval> {
    if (!(std::abs(x) < 1.0)) return std::nullopt;
    const double g = x / std::sqrt(1.0 - x * x);
    return ClosedInterval{ExtReal{g}, ExtReal{g}};
  };
  c.domain = ClosedInterval{ExtReal{-1.0}, ExtReal{1.0}};
  return ConvexSpec::custom(std::move(c));
}

inline ConvexSpec cosh_minus_one() {
  Custom c;
  c.label = "cosh_minus_one";
  c.value = [](double x) { return std::cosh(x) - 1.0; };
  c.subgradient = [](double x) -> std::optional<ClosedInterval> {
    return ClosedInterval{ExtReal{std::sinh(x)}, ExtReal{std::sinh(x)}};
  };
  c.domain = ClosedInterval{ExtReal::neg_inf(), ExtReal::pos_inf()};
  return ConvexSpec::custom(std::move(c));
}

inline std::vector<NamedPsi> psi_catalog() {
  return {
      {"indicator[0,inf)", ConvexSpec::indicator(ExtReal{0.0}, ExtReal::pos_inf())},
      {"indicator[-1,2]", ConvexSpec::indicator(ExtReal{-1.0}, ExtReal{2.0})},
      {"indicator(-inf,3]", ConvexSpec::indicator(ExtReal::neg_inf(), ExtReal{3.0})},
      {"zero", ConvexSpec::zero()},
      {"abs(1)", ConvexSpec::abs_value(1.0)},
      {"abs(2.5)", ConvexSpec::abs_value(2.5)},
      {"quadratic(1)", ConvexSpec::quadratic(1.0)},
      {"quadratic(0)", ConvexSpec::quadratic(0.0)},
      {"even_power(4,1)", ConvexSpec::even_power(4, 1.0)},
      {"even_power(6,0.5)", ConvexSpec::even_power(6, 0.5)},
      {"max_affine", ConvexSpec::max_affine({{-2.0, -1.0}, {0.0, 0.0}, {3.0, -2.0}})},
      {"cosh-1", cosh_minus_one()},
      {"circle_cap", circle_cap()},
  };
}

}  // namespace svi::testing
