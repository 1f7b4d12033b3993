#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "svi/errors.hpp"
#include "svi/yamada_watanabe.hpp"

using namespace svi;
using boost::math::quadrature::gauss_kronrod;

namespace {

std::vector<std::pair<double, double>> parameter_grid() {
  std::vector<std::pair<double, double>> out;
  for (double eps : {0.9, 0.3, 1e-2, 1e-4})
    for (double delta : {1.01, 1.5, 4.0, 50.0, 1e6}) out.emplace_back(eps, delta);
  return out;
}

// int_0^r k(z) phi(z) dz by adaptive quadrature, split where the weight has
// kinks (support ends and the tent's apex at eps / sqrt(delta)).
template <class K>
double weighted_mass(const YWFunction& f, double r, K k) {
  const double lo = f.epsilon() / f.delta();
  const double hi = std::min(r, f.epsilon());
  if (hi <= lo) return 0.0;
  const double apex = f.epsilon() / std::sqrt(f.delta());
  auto integrand = [&](double z) { return k(z) * f.weight(z); };
  auto piece = [&](double a, double b) {
    return b > a ? gauss_kronrod<double, 31>::integrate(integrand, a, b, 15, 1e-14) : 0.0;
  };
  return piece(lo, std::min(hi, apex)) + piece(std::max(lo, apex), hi);
}

// Phi(r) = int_0^r phi, independent of the closed form.
double mass_oracle(const YWFunction& f, double r) {
  return weighted_mass(f, r, [](double) { return 1.0; });
}

// V(r) = int_0^r Phi = int_0^r (r - z) phi(z) dz.
double value_oracle(const YWFunction& f, double r) {
  return weighted_mass(f, r, [r](double z) { return r - z; });
}

}  // namespace

TEST_SUITE("yw_diagnostics") {
  TEST_CASE("construction preconditions") {
    CHECK_THROWS_AS(build_yw(0.0, 2.0), InvalidParams);
    CHECK_THROWS_AS(build_yw(1.0, 2.0), InvalidParams);
    CHECK_THROWS_AS(build_yw(0.5, 1.0), InvalidParams);
    CHECK_THROWS_AS(build_yw(0.5, 1.0 + 1e-10), InvalidParams);
    CHECK_NOTHROW(build_yw(0.5, 1.0 + 1e-6));
  }

  TEST_CASE("values at and below the support") {
    const auto f = build_yw(0.1, 10.0);
    CHECK(f.value(0.0) == 0.0);
    CHECK(f.derivative(0.0) == 0.0);
    for (double x : {0.0, 1e-5, 0.005, -0.0099}) CHECK(f.second_derivative(x) == 0.0);
    CHECK(f.second_derivative(0.2) == 0.0);
  }

  TEST_CASE("weight integrates to one") {
    for (const auto& [eps, delta] : parameter_grid()) {
      const auto f = build_yw(eps, delta);
      CAPTURE(eps);
      CAPTURE(delta);
      CHECK(std::abs(mass_oracle(f, eps) - 1.0) <= 1e-10);
    }
  }

  TEST_CASE("derivative equals the integrated weight and V its integral") {
    for (const auto& [eps, delta] : parameter_grid()) {
      const auto f = build_yw(eps, delta);
      for (double frac : {0.0, 0.2, 0.5, 0.9, 1.0, 1.7}) {
        const double r = eps / delta + frac * (eps - eps / delta);
        CAPTURE(eps);
        CAPTURE(delta);
        CAPTURE(r);
        CHECK(f.derivative(r) == doctest::Approx(mass_oracle(f, r)).epsilon(1e-10).scale(1.0));
        CHECK(f.value(r) == doctest::Approx(value_oracle(f, r)).epsilon(1e-9).scale(eps));
        CHECK(f.value(-r) == f.value(r));
        CHECK(f.derivative(-r) == -f.derivative(r));
      }
    }
  }

  TEST_CASE("bounds of the smoothing family") {
    std::mt19937_64 rng{5};
    for (const auto& [eps, delta] : parameter_grid()) {
      const auto f = build_yw(eps, delta);
      std::uniform_real_distribution<double> U{-3.0 * eps, 3.0 * eps};
      for (int i = 0; i < 2000; ++i) {
        const double x = U(rng);
        const double ax = std::abs(x);
        const double v = f.value(x);
        CHECK(ax - eps <= v + 1e-15);
        CHECK(v <= ax + 1e-15);
        const double sd = (x > 0) - (x < 0);
        CHECK(sd * f.derivative(x) >= 0.0);
        CHECK(sd * f.derivative(x) <= 1.0 + 1e-15);
        const double w = f.second_derivative(x);
        const bool in_support = ax >= eps / delta && ax <= eps;
        CHECK(w >= 0.0);
        if (in_support) CHECK(w <= 2.0 / (ax * std::log(delta)) * (1.0 + 1e-14));
        else CHECK(w == 0.0);
      }
    }
  }

  TEST_CASE("finite-difference derivative") {
    std::mt19937_64 rng{9};
    for (const auto& [eps, delta] : parameter_grid()) {
      const auto f = build_yw(eps, delta);
      std::uniform_real_distribution<double> U{-2.0 * eps, 2.0 * eps};
      for (int i = 0; i < 50; ++i) {
        const double x = U(rng);
        const double h = 1e-6 * eps;
        const double fd = (f.value(x + h) - f.value(x - h)) / (2.0 * h);
        const double w_max = 2.0 * delta / (eps * std::log(delta));
        CHECK(std::abs(fd - f.derivative(x)) <= w_max * h + 1e-8);
      }
    }
  }

  TEST_CASE("path application") {
    const auto f = build_yw(0.1, 3.0);
    const std::vector<double> zeros{0.0, 0.0, 0.0};
    CHECK(yw_apply_path(f, zeros) == zeros);
    const auto at_eps = yw_apply_path(f, std::vector<double>{0.1, 0.1});
    CHECK(at_eps[0] == at_eps[1]);
    CHECK(at_eps[0] >= 0.0);
    CHECK(at_eps[0] <= 0.1);
    const auto far = yw_apply_path(f, std::vector<double>{1.0});
    CHECK(far[0] >= 0.9);
    CHECK(far[0] <= 1.0);
  }
}
