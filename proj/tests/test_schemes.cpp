#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "catalog.hpp"
#include "doctest.h"
#include "svi/convergence.hpp"
#include "svi/errors.hpp"
#include "svi/schemes.hpp"

using namespace svi;

namespace {

const EmpiricalMeasure& dirac0() {
  static const EmpiricalMeasure mu = EmpiricalMeasure::dirac(0.0);
  return mu;
}

const ConvexSpec half_line = ConvexSpec::indicator(ExtReal{0.0}, ExtReal::pos_inf());

void check_path_invariants(const PathRecord& rec, const ConvexSpec& psi, bool confined) {
  REQUIRE(rec.states.size() == rec.phi.size());
  CHECK(rec.phi.front() == 0.0);
  CHECK(rec.var_phi.front() == 0.0);
  const double x0 = rec.states.front();
  for (std::size_t k = 0; k < rec.states.size(); ++k) {
    const double rebuilt = x0 + rec.drift_integral[k] + rec.noise_integral[k] - rec.phi[k];
    const double scale = 1.0 + std::abs(x0) + std::abs(rec.drift_integral[k]) + std::abs(rec.noise_integral[k]) +
                         std::abs(rec.phi[k]);
    CHECK(std::abs(rec.states[k] - rebuilt) <= 1e-12 * scale);
    if (k > 0) {
      CHECK(rec.var_phi[k] >= rec.var_phi[k - 1]);
      const double jump = std::abs(rec.phi[k] - rec.phi[k - 1]);
      CHECK(std::abs(rec.var_phi[k] - rec.var_phi[k - 1] - jump) <= 1e-15 * (1.0 + rec.var_phi[k]));
      if (confined) CHECK(psi.domain().contains(rec.states[k]));
    }
  }
}

}  // namespace

TEST_SUITE("schemes") {
  TEST_CASE("penalized step examples") {
    const auto zero_pair = constant_pair(0.0, 0.0);
    const YosidaView view{half_line, 2.0};
    const auto cfg = SchemeConfig::penalized(2.0, 0.1);
    auto r = step_penalized(-1.0, 0.0, dirac0(), zero_pair, view, cfg, 0.37);
    CHECK(r.x_next == doctest::Approx(-0.8).epsilon(1e-15));
    CHECK(r.dphi == doctest::Approx(-0.2).epsilon(1e-15));
    r = step_penalized(3.0, 0.0, dirac0(), zero_pair, view, cfg, -1.0);
    CHECK(r.x_next == 3.0);
    CHECK(r.dphi == 0.0);
    const YosidaView free_view{ConvexSpec::zero(), 1.0};
    r = step_penalized(0.0, 0.0, dirac0(), constant_pair(1.0, 0.0), free_view, SchemeConfig::penalized(1.0, 0.5, false),
                       0.0);
    CHECK(r.x_next == 0.5);
    // taming only shrinks the drift
    r = step_penalized(0.0, 0.0, dirac0(), constant_pair(1.0, 0.0), free_view, SchemeConfig::penalized(1.0, 0.5, true),
                       0.0);
    CHECK(r.x_next == doctest::Approx(0.5 / 1.5));
  }

  TEST_CASE("proximal step examples") {
    const auto zero_pair = constant_pair(0.0, 1.0);
    const auto cfg = SchemeConfig::proximal(0.01);
    auto r = step_proximal(0.0, 0.0, dirac0(), zero_pair, half_line, cfg, -0.3);
    CHECK(r.x_next == 0.0);
    CHECK(r.dphi == doctest::Approx(-0.3).epsilon(1e-15));
    r = step_proximal(1.0, 0.0, dirac0(), zero_pair, half_line, cfg, 0.2);
    CHECK(r.x_next == 1.2);
    CHECK(r.dphi == 0.0);
    r = step_proximal(3.0, 0.0, dirac0(), constant_pair(0.0, 0.0), ConvexSpec::abs_value(1.0),
                      SchemeConfig::proximal(1.0), 0.0);
    CHECK(r.x_next == 2.0);
    CHECK(r.dphi == 1.0);
  }

  TEST_CASE("config preconditions") {
    CHECK_THROWS_AS(SchemeConfig::proximal(0.0).validate(), InvalidParams);
    CHECK_THROWS_AS(SchemeConfig::penalized(0.0, 0.1).validate(), InvalidParams);
    CHECK_THROWS_AS(SchemeConfig::penalized(30.0, 0.1).validate(), InvalidParams);
    CHECK_NOTHROW(SchemeConfig::penalized(20.0, 0.1).validate());
  }

  TEST_CASE("constant path without forces") {
    const auto rec = simulate_frozen(constant_pair(0.0, 0.0), ConvexSpec::zero(), SchemeConfig::proximal(0.01), 0.7,
                                     dirac0(), {1, 0, StreamTag::ParticleSystem}, 1.0);
    CHECK(rec.steps() == 100);
    for (std::size_t k = 0; k < rec.states.size(); ++k) {
      CHECK(rec.states[k] == 0.7);
      CHECK(rec.phi[k] == 0.0);
    }
    CHECK(rec.times.back() == doctest::Approx(1.0));
    CHECK(rec.audit.count() == 100);
  }

  TEST_CASE("path invariants over the catalog, both schemes") {
    const auto pair = constant_pair(0.3, 1.0);
    for (const auto& [name, psi] : testing::psi_catalog()) {
      CAPTURE(name);
      const double x0 = psi.interior_anchor();
      for (std::uint64_t p = 0; p < 5; ++p) {
        const NoiseKey key{11, p, StreamTag::ParticleSystem};
        const auto prox = simulate_frozen(pair, psi, SchemeConfig::proximal(1.0 / 256), x0, dirac0(), key, 1.0);
        check_path_invariants(prox, psi, true);
        const auto pen = simulate_frozen(pair, psi, SchemeConfig::penalized(64.0, 1.0 / 256), x0, dirac0(), key, 1.0);
        check_path_invariants(pen, psi, false);
        CHECK(prox.audit == pen.audit);
      }
    }
  }

  TEST_CASE("proximal steps satisfy the sampled variational inequality") {
    std::mt19937_64 rng{21};
    const auto pair = constant_pair(-0.5, 1.5);
    const double dt = 1.0 / 128;
    for (const auto& [name, psi] : testing::psi_catalog()) {
      CAPTURE(name);
      const auto rec = simulate_frozen(pair, psi, SchemeConfig::proximal(dt), psi.interior_anchor(), dirac0(),
                                       {3, 0, StreamTag::ParticleSystem}, 1.0);
      const auto& dom = psi.domain();
      const double lo = dom.lo.is_finite() ? dom.lo.value() : -8.0;
      const double hi = dom.hi.is_finite() ? dom.hi.value() : 8.0;
      std::uniform_real_distribution<double> U{lo, hi};
      for (std::size_t k = 1; k < rec.states.size(); ++k) {
        const double x = rec.states[k];
        const double dphi = rec.phi[k] - rec.phi[k - 1];
        const double px = psi.value(x).value();
        for (int j = 0; j < 4; ++j) {
          const double rho = U(rng);
          const double lhs = (rho - x) * dphi + px * dt;
          const double rhs = psi.value(rho).value() * dt;
          CHECK(lhs <= rhs + 1e-9 * dt * (1.0 + std::abs(rhs) + std::abs(lhs)));
        }
      }
    }
  }

  TEST_CASE("toy cubic runs to T = 1 with finite states") {
    const auto psi = ConvexSpec::indicator(ExtReal{-2.0}, ExtReal{2.0});
    for (std::uint64_t p = 0; p < 20; ++p) {
      const auto rec = simulate_frozen(toy_cubic(), psi, SchemeConfig::proximal(1e-3), 0.5, dirac0(),
                                       {5, p, StreamTag::ParticleSystem}, 1.0);
      for (double x : rec.states) CHECK(std::isfinite(x));
      CHECK(std::isfinite(rec.var_phi.back()));
      check_path_invariants(rec, psi, true);
    }
  }

  TEST_CASE("total variation is the running sum of the step increments") {
    const auto psi = ConvexSpec::indicator(ExtReal{-2.0}, ExtReal{2.0});
    const auto pair = toy_cubic();
    const auto cfg = SchemeConfig::proximal(1.0 / 100);
    const NoiseKey key{6, 1, StreamTag::ParticleSystem};
    const auto rec = simulate_frozen(pair, psi, cfg, 1.9, dirac0(), key, 1.0);
    const IncrementGrid grid{1.0, cfg.dt};
    double x = 1.9, total = 0.0;
    for (std::size_t k = 0; k < grid.steps(); ++k) {
      const auto r = step_proximal(x, static_cast<double>(k) * cfg.dt, dirac0(), pair, psi, cfg, grid.increment(key, 0, k));
      total += std::abs(r.dphi);
      x = r.x_next;
    }
    CHECK(rec.var_phi.back() == total);
    CHECK(rec.states.back() == x);
    CHECK(total > 0.0);
  }

  TEST_CASE("frozen flow must cover the grid") {
    const std::vector<EmpiricalMeasure> short_flow(3, dirac0());
    CHECK_THROWS_AS(simulate_frozen(constant_pair(0, 0), ConvexSpec::zero(), SchemeConfig::proximal(0.1), 0.0,
                                    MeasureFlowRef{std::span<const EmpiricalMeasure>(short_flow)}, {}, 1.0),
                    InvalidParams);
  }

  TEST_CASE("coarse levels of the noise grid drive coarse schemes") {
    const auto pair = constant_pair(0.0, 1.0);
    const NoiseKey key{8, 2, StreamTag::ParticleSystem};
    const auto fine = simulate_frozen(pair, ConvexSpec::zero(), SchemeConfig::proximal(1.0 / 64), 0.0, dirac0(), key,
                                      1.0, {1.0 / 64, 0});
    const auto coarse = simulate_frozen(pair, ConvexSpec::zero(), SchemeConfig::proximal(1.0 / 16), 0.0, dirac0(), key,
                                        1.0, {1.0 / 64, 2});
    // free Brownian motion: the coarse path is the fine one subsampled
    for (std::size_t k = 0; k < coarse.states.size(); ++k)
      CHECK(coarse.states[k] == doctest::Approx(fine.states[4 * k]).epsilon(1e-13).scale(1e-13));
    CHECK(sup_distance(coarse.states, fine.states, 2) <= 1e-13);
    CHECK_THROWS_AS(simulate_frozen(pair, ConvexSpec::zero(), SchemeConfig::proximal(1.0 / 16), 0.0, dirac0(), key,
                                    1.0, {1.0 / 64, 1}),
                    InvalidParams);
    CHECK_THROWS_AS(sup_distance(coarse.states, fine.states, 1), InvalidParams);
  }

  TEST_CASE("without a constraint both schemes agree for every n") {
    const auto study = penalization_study(constant_pair(0.2, 1.0), ConvexSpec::zero(),
                                          InitialCondition::deterministic(0.1), 1.0 / 512, true, 1.0,
                                          {4, 16, 64, 256}, 10, 3);
    for (const auto& row : study.diffs)
      for (double d : row) CHECK(d == 0.0);
    CHECK(study.nonincreasing_fraction() == 1.0);
  }

  TEST_CASE("penalized paths approach the proximal path as n grows") {
    const auto study = penalization_study(constant_pair(0.0, 1.0), half_line, InitialCondition::deterministic(0.0),
                                          1.0 / 512, true, 1.0, {4, 16, 64, 256}, 40, 9);
    CHECK(study.mean(3) < study.mean(0));
    CHECK(study.nonincreasing_fraction() >= 0.9);
  }

  TEST_CASE("path CSV columns") {
    const auto rec = simulate_frozen(constant_pair(0.0, 0.0), ConvexSpec::zero(), SchemeConfig::proximal(0.5), 1.0,
                                     dirac0(), {}, 1.0);
    std::ostringstream os;
    rec.write_csv(os);
    const std::string text = os.str();
    CHECK(text.rfind("t,X,phi,var_phi\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);
  }
}
