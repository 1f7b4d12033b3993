#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "catalog.hpp"
#include "doctest.h"
#include "svi/convex.hpp"
#include "svi/errors.hpp"

using namespace svi;
using svi::testing::psi_catalog;

namespace {

const ExtReal inf = ExtReal::pos_inf();

double psi_at(const ConvexSpec& psi, double x) {
  const ExtReal v = psi.value(x);
  REQUIRE(v.is_finite());
  return v.value();
}

bool contains_approx(const ClosedInterval& iv, double z, double tol) {
  const bool above = !iv.lo.is_finite() ? !iv.lo.is_pos_inf() : z >= iv.lo.value() - tol;
  const bool below = !iv.hi.is_finite() ? !iv.hi.is_neg_inf() : z <= iv.hi.value() + tol;
  return above && below;
}

}  // namespace

TEST_SUITE("convex_core") {
  TEST_CASE("subdifferential examples") {
    const auto half_line = ConvexSpec::indicator(ExtReal{0.0}, inf);
    auto s = subdifferential_interval(half_line, 0.5);
    REQUIRE(s);
    CHECK(*s == ClosedInterval{ExtReal{0.0}, ExtReal{0.0}});
    s = subdifferential_interval(half_line, 0.0);
    REQUIRE(s);
    CHECK(s->lo.is_neg_inf());
    CHECK(s->hi == ExtReal{0.0});
    CHECK_FALSE(subdifferential_interval(half_line, -0.1));

    s = subdifferential_interval(ConvexSpec::abs_value(1.0), 0.0);
    REQUIRE(s);
    CHECK(*s == ClosedInterval{ExtReal{-1.0}, ExtReal{1.0}});
  }

  TEST_CASE("resolvent examples") {
    CHECK(resolvent(ConvexSpec::abs_value(1.0), 1.0, 3.0) == 2.0);
    const auto unit = ConvexSpec::indicator(ExtReal{0.0}, ExtReal{1.0});
    for (double lambda : {0.01, 1.0, 100.0}) CHECK(resolvent(unit, lambda, 2.0) == 1.0);
    CHECK(resolvent(ConvexSpec::even_power(4, 1.0), 1.0, 5.0) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK_THROWS_AS(resolvent(unit, 0.0, 1.0), InvalidParams);
  }

  TEST_CASE("moreau envelope examples") {
    CHECK(moreau_envelope(YosidaView{ConvexSpec::indicator(ExtReal{0.0}, inf), 2.0}, -1.0) == 1.0);
    CHECK(moreau_envelope(YosidaView{ConvexSpec::abs_value(1.0), 1.0}, 3.0) == 2.5);
    CHECK(moreau_envelope(YosidaView{ConvexSpec::quadratic(1.0), 1.0}, 2.0) == 1.0);
  }

  TEST_CASE("yosida gradient examples") {
    CHECK(yosida_gradient(YosidaView{ConvexSpec::indicator(ExtReal{0.0}, inf), 3.0}, -1.0) == -3.0);
    CHECK(yosida_gradient(YosidaView{ConvexSpec::abs_value(1.0), 1.0}, 3.0) == 1.0);
    for (const auto& [name, psi] : psi_catalog())
      for (double n : {0.5, 1.0, 37.0, 1000.0}) {
        CAPTURE(name);
        CHECK(std::abs(yosida_gradient(YosidaView{psi, n}, 0.0)) <= 1e-9);
      }
  }

  TEST_CASE("gradients on flat pieces carry no cancellation error") {
    // n (x - J x) would be off by about n ulp(x) here; the slopes are exact
    for (double x : {40.064288796143998, -42.802978280299428, 18.6}) {
      CHECK(yosida_gradient(YosidaView{ConvexSpec::abs_value(1.0), 1000.0}, x) == (x > 0 ? 1.0 : -1.0));
      const auto hinge = ConvexSpec::max_affine({{-2.0, 0.0}, {3.0, 0.0}});
      CHECK(yosida_gradient(YosidaView{hinge, 1000.0}, x) == (x > 0 ? 3.0 : -2.0));
    }
    CHECK(yosida_gradient(YosidaView{ConvexSpec::abs_value(2.0), 10.0}, 0.05) == 0.5);
    CHECK(yosida_gradient(YosidaView{ConvexSpec::quadratic(3.0), 1.0}, 8.0) == 6.0);
  }

  TEST_CASE("projection examples") {
    const auto unit = ConvexSpec::indicator(ExtReal{0.0}, ExtReal{1.0});
    CHECK(project_domain(unit, -0.5) == 0.0);
    CHECK(project_domain(ConvexSpec::quadratic(2.0), 7.3) == 7.3);
    CHECK(project_domain(unit, 0.5) == 0.5);
  }

  TEST_CASE("factories reject malformed parameters") {
    CHECK_THROWS_AS(ConvexSpec::indicator(ExtReal{0.5}, ExtReal{1.0}), InvalidParams);
    CHECK_THROWS_AS(ConvexSpec::indicator(ExtReal{0.0}, ExtReal{0.0}), InvalidParams);
    CHECK_THROWS_AS(ConvexSpec::abs_value(0.0), InvalidParams);
    CHECK_THROWS_AS(ConvexSpec::quadratic(-1.0), InvalidParams);
    CHECK_THROWS_AS(ConvexSpec::even_power(3, 1.0), InvalidParams);
    CHECK_THROWS_AS(ConvexSpec::even_power(4, 0.0), InvalidParams);
    // max intercept must be attained at 0 with value 0
    CHECK_THROWS_AS(ConvexSpec::max_affine({{1.0, 0.5}, {-1.0, 0.0}}), InvalidParams);
    // all slopes positive: 0 is not a minimizer
    CHECK_THROWS_AS(ConvexSpec::max_affine({{1.0, 0.0}, {2.0, 0.0}}), InvalidParams);
    CHECK_THROWS_AS(YosidaView(ConvexSpec::zero(), 0.0), InvalidParams);
  }

  TEST_CASE("indicator with 0 on the boundary keeps an interior anchor") {
    const auto half_line = ConvexSpec::indicator(ExtReal{0.0}, inf);
    CHECK(half_line.interior_anchor() > 0.0);
    CHECK(ConvexSpec::indicator(ExtReal{-2.0}, ExtReal{2.0}).interior_anchor() == 0.0);
    CHECK(ConvexSpec::indicator(ExtReal{-4.0}, ExtReal{0.0}).interior_anchor() == -2.0);
  }

  TEST_CASE("values outside the domain are tagged +inf") {
    const auto unit = ConvexSpec::indicator(ExtReal{0.0}, ExtReal{1.0});
    CHECK(unit.value(1.5).is_pos_inf());
    CHECK(unit.value(0.5) == ExtReal{0.0});
    CHECK(svi::testing::circle_cap().value(1.5).is_pos_inf());
  }

  TEST_CASE("custom boundary with diverging slope has empty subdifferential") {
    const auto cap = svi::testing::circle_cap();
    CHECK_FALSE(subdifferential_interval(cap, 1.0));
    CHECK_FALSE(subdifferential_interval(cap, -1.0));
    CHECK(subdifferential_interval(cap, 0.5));
    CHECK(std::abs(resolvent(cap, 1.0, 10.0)) < 1.0);
  }

  TEST_CASE("resolvent satisfies the optimality inclusion n(x - Jx) in dpsi(Jx)") {
    std::mt19937_64 rng{101};
    std::uniform_real_distribution<double> U{-50.0, 50.0};
    for (const auto& [name, psi] : psi_catalog())
      for (double n : {1.0, 10.0, 100.0, 1000.0})
        for (int i = 0; i < 300; ++i) {
          const double x = U(rng);
          const YosidaView view{psi, n};
          const double j = view.resolvent(x);
          const double g = yosida_gradient(view, x);
          auto sub = subdifferential_interval(psi, j);
          CAPTURE(name);
          CAPTURE(n);
          CAPTURE(x);
          if (name == "circle_cap" && std::abs(j) >= 1.0 - 1e-12) continue;
          REQUIRE(sub);
          if (contains_approx(*sub, g, 1e-7 * (1.0 + std::abs(g)))) continue;
          // Near a steep boundary the slope is ill-conditioned in j; then the
          // inclusion must hold within the bisection tolerance on j instead.
          const double d = 1e-11;
          const auto left = subdifferential_interval(psi, j - d), right = subdifferential_interval(psi, j + d);
          REQUIRE(left);
          REQUIRE(right);
          CHECK(left->lo <= ExtReal{g});
          CHECK(ExtReal{g} <= right->hi);
        }
  }

  TEST_CASE("envelope is below every sampled point of the inf-convolution and matches its minimum") {
    std::mt19937_64 rng{7};
    std::uniform_real_distribution<double> U{-5.0, 5.0};
    for (const auto& [name, psi] : psi_catalog())
      for (double n : {1.0, 10.0}) {
        const YosidaView view{psi, n};
        for (int i = 0; i < 40; ++i) {
          const double x = U(rng);
          const double env = moreau_envelope(view, x);
          int above = 0;
          std::vector<double> candidates;
          for (int k = -6000; k <= 6000; ++k) candidates.push_back(x + k * 1e-3);
          for (const ExtReal& e : {psi.domain().lo, psi.domain().hi})
            if (e.is_finite()) candidates.push_back(e.value());
          std::sort(candidates.begin(), candidates.end());
          std::vector<std::pair<double, double>> pts;  // (y, f(y)) on the domain
          for (double y : candidates) {
            const ExtReal v = psi.value(y);
            if (!v.is_finite()) continue;
            const double f = 0.5 * n * (y - x) * (y - x) + v.value();
            above += env > f + 1e-12 * (1.0 + std::abs(f));
            pts.emplace_back(y, f);
          }
          CAPTURE(name);
          CAPTURE(x);
          CHECK(above == 0);
          // Convexity: past each neighbour of the best sample, f stays above the
          // secant through the best sample, which bounds how far the true minimum
          // can sit below it.
          const auto best_it = std::min_element(pts.begin(), pts.end(),
                                                [](const auto& a, const auto& b) { return a.second < b.second; });
          const auto b = static_cast<std::size_t>(best_it - pts.begin());
          double lower = best_it->second;
          if (b > 0) {
            const auto& [ya, fa] = pts[b - 1];
            const double slope = (best_it->second - fa) / (best_it->first - ya);
            if (b + 1 < pts.size()) lower = std::min(lower, best_it->second + slope * (pts[b + 1].first - best_it->first));
          }
          if (b + 1 < pts.size()) {
            const auto& [yc, fc] = pts[b + 1];
            const double slope = (fc - best_it->second) / (yc - best_it->first);
            if (b > 0) lower = std::min(lower, best_it->second - slope * (best_it->first - pts[b - 1].first));
          }
          CHECK(env <= best_it->second + 1e-12 * (1.0 + std::abs(env)));
          CHECK(env >= lower - 1e-12 * (1.0 + std::abs(env)));
        }
      }
  }

  TEST_CASE("prox identity and sandwich") {
    std::mt19937_64 rng{11};
    std::uniform_real_distribution<double> U{-50.0, 50.0};
    for (const auto& [name, psi] : psi_catalog())
      for (double n : {1.0, 10.0, 100.0}) {
        const YosidaView view{psi, n};
        for (int i = 0; i < 1000; ++i) {
          const double x = U(rng);
          const double env = moreau_envelope(view, x);
          const double g = yosida_gradient(view, x);
          const double pj = psi_at(psi, view.resolvent(x));
          CHECK(std::abs(env - pj - g * g / (2.0 * n)) <= 1e-10 * (1.0 + std::abs(env)));
          CHECK(pj <= env + 1e-10 * (1.0 + std::abs(env)));
          const ExtReal px = psi.value(x);
          if (px.is_finite()) CHECK(env <= px.value() + 1e-10 * (1.0 + std::abs(env)));
        }
      }
  }

  TEST_CASE("resolvent is nonexpansive and the gradient is n-Lipschitz") {
    std::mt19937_64 rng{13};
    std::uniform_real_distribution<double> U{-50.0, 50.0};
    for (const auto& [name, psi] : psi_catalog())
      for (double n : {1.0, 100.0}) {
        const YosidaView view{psi, n};
        for (int i = 0; i < 2000; ++i) {
          const double x = U(rng), y = U(rng);
          CHECK(std::abs(view.resolvent(x) - view.resolvent(y)) <= std::abs(x - y) + 1e-12);
          const double gx = yosida_gradient(view, x), gy = yosida_gradient(view, y);
          CHECK(std::abs(gx - gy) <= n * std::abs(x - y) * (1.0 + 1e-12) + 1e-9 * n);
        }
      }
  }

  TEST_CASE("-x grad psi^n(x) <= 0") {
    std::mt19937_64 rng{17};
    std::uniform_real_distribution<double> U{-50.0, 50.0};
    for (const auto& [name, psi] : psi_catalog())
      for (double n : {1.0, 10.0, 1000.0}) {
        const YosidaView view{psi, n};
        for (int i = 0; i < 500; ++i) {
          const double x = U(rng);
          CHECK(-x * yosida_gradient(view, x) <= 1e-12);
        }
      }
  }

  TEST_CASE("subdifferential is monotone") {
    std::mt19937_64 rng{19};
    std::uniform_real_distribution<double> U{-3.0, 3.0};
    for (const auto& [name, psi] : psi_catalog())
      for (int i = 0; i < 500; ++i) {
        double x = U(rng), y = U(rng);
        if (x > y) std::swap(x, y);
        const auto sx = subdifferential_interval(psi, x);
        const auto sy = subdifferential_interval(psi, y);
        if (!sx || !sy) continue;
        CAPTURE(name);
        CHECK(sx->hi <= sy->lo);
      }
  }

  TEST_CASE("resolvent approaches the projection as n grows") {
    for (const auto& [name, psi] : psi_catalog()) {
      for (double x : {-7.0, -0.3, 0.2, 4.0, 40.0}) {
        double prev = INFINITY;
        for (int e = 0; e <= 10; ++e) {
          const double n = std::ldexp(1.0, e);
          const double gap = std::abs(YosidaView{psi, n}.resolvent(x) - project_domain(psi, x));
          CAPTURE(name);
          CAPTURE(x);
          CAPTURE(n);
          if (std::holds_alternative<IndicatorInterval>(psi.kind())) CHECK(gap == 0.0);
          CHECK(gap <= prev + 1e-12);
          prev = gap;
        }
      }
    }
  }

  TEST_CASE("custom evaluators must be normalized at 0") {
    Custom c;
    c.label = "shifted";
    c.value = [](double x) { return (x - 1.0) * (x - 1.0); };
    c.subgradient = [](double x) -> std::optional<ClosedInterval> {
      return ClosedInterval{ExtReal{2 * (x - 1)}, ExtReal{2 * (x - 1)}};
    };
    c.domain = ClosedInterval{ExtReal::neg_inf(), ExtReal::pos_inf()};
    CHECK_THROWS_AS(ConvexSpec::custom(c), InvalidParams);
  }

  TEST_CASE("zero psi is recognised") {
    CHECK(ConvexSpec::zero().is_zero());
    CHECK(ConvexSpec::quadratic(0.0).is_zero());
    CHECK_FALSE(ConvexSpec::abs_value(1.0).is_zero());
    CHECK_FALSE(ConvexSpec::indicator(ExtReal{0.0}, inf).is_zero());
  }
}
