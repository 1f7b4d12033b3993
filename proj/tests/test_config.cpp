#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "svi/config.hpp"
#include "svi/experiments.hpp"

using namespace svi;

namespace {

const char* kSimple = R"(name = still
seed = 3
[coefficients]
key = custom
drift = "0"
diffusion = "0"
[psi]
key = none
[initial]
kind = deterministic
x0 = 0.25
[grid]
T = 1
dt = 0.125
[experiment]
kind = simulate
paths = 3
record = 2
)";

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto at = s.find(from);
  REQUIRE(at != std::string::npos);
  return s.replace(at, from.size(), to);
}

std::vector<std::string> validation_errors(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ValidationError& e) {
    return e.errors();
  }
  return {};
}

bool any_contains(const std::vector<std::string>& v, const std::string& needle) {
  return std::any_of(v.begin(), v.end(), [&](const auto& s) { return s.find(needle) != std::string::npos; });
}

const std::string* table(const ExperimentReport& r, const std::string& name) {
  for (const auto& t : r.tables)
    if (t.name == name) return &t.csv;
  return nullptr;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("built-in toy scenario") {
    const auto cfg = load_config("builtin:toy_cubic");
    const auto psi = build_psi(cfg);
    REQUIRE(std::holds_alternative<IndicatorInterval>(psi.kind()));
    CHECK(psi.domain().lo == ExtReal{-2.0});
    CHECK(psi.domain().hi == ExtReal{2.0});
    CHECK(cfg.experiment_kind() == "simulate");
    CHECK(build_scheme(cfg).kind == SchemeKind::Proximal);
    CHECK(build_scheme(cfg).taming);
    CHECK(load_config("toy_cubic.scenario") == cfg);
  }

  TEST_CASE("zero dt is rejected by name") {
    const auto errs = validation_errors(replace(kSimple, "dt = 0.125", "dt = 0"));
    REQUIRE_FALSE(errs.empty());
    CHECK(any_contains(errs, "[grid] dt"));
  }

  TEST_CASE("unknown coefficient key lists the registry") {
    const auto errs = validation_errors(replace(kSimple, "key = custom", "key = cubic_toy"));
    REQUIRE(errs.size() >= 1);
    CHECK(any_contains(errs, "cubic_toy"));
    for (const auto& e : coefficient_registry()) CHECK(any_contains(errs, e.key));
  }

  TEST_CASE("every violation is reported at once") {
    std::string text = replace(kSimple, "dt = 0.125", "dt = -1");
    text = replace(text, "paths = 3", "paths = 0\ncolour = red");
    text = replace(text, "seed = 3", "seed = 3\nfavourite = 7");
    const auto errs = validation_errors(text);
    CHECK(errs.size() >= 4);
    CHECK(any_contains(errs, "dt"));
    CHECK(any_contains(errs, "paths"));
    CHECK(any_contains(errs, "colour"));
    CHECK(any_contains(errs, "favourite"));
  }

  TEST_CASE("parse errors carry line and column") {
    try {
      parse_config("name = a\n[grid\nT = 1\n", "broken.scenario");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(e.column() >= 1);
      CHECK(std::string(e.what()).rfind("broken.scenario:2:", 0) == 0);
    }
    CHECK_THROWS_AS(parse_config("name = \"unterminated\n"), ParseError);
    CHECK_THROWS_AS(parse_config("name = a\nname = b\n"), ConfigError);
  }

  TEST_CASE("cross-field checks") {
    auto errs = validation_errors(replace(kSimple, "drift = \"0\"", "drift = \"mean(mu)\""));
    CHECK(any_contains(errs, "measure-free"));
    errs = validation_errors(replace(kSimple, "dt = 0.125", "dt = 0.3"));
    CHECK_FALSE(errs.empty());
    errs = validation_errors(replace(kSimple, "drift = \"0\"", "drift = \"x +\""));
    CHECK(any_contains(errs, "drift"));
  }

  TEST_CASE("canonical form round-trips for every built-in scenario") {
    REQUIRE(builtin_scenarios().size() >= 5);
    for (const auto& b : builtin_scenarios()) {
      CAPTURE(b.name);
      const auto cfg = parse_config(b.text, b.name);
      const auto text = serialize(cfg);
      const auto again = parse_config(text);
      CHECK(again == cfg);
      CHECK(serialize(again) == text);
      CHECK(config_hash(again) == config_hash(cfg));
      CHECK(config_hash(cfg).size() == 16);
    }
    const auto a = parse_config(kSimple);
    const auto b = parse_config(replace(kSimple, "seed = 3", "seed = 4"));
    CHECK(config_hash(a) != config_hash(b));
  }

  TEST_CASE("a forceless simulation writes constant paths") {
    const auto cfg = parse_config(kSimple);
    const auto rep = run_experiment(cfg);
    const auto* paths = table(rep, "paths");
    REQUIRE(paths != nullptr);
    std::istringstream in(*paths);
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,X_1,X_2");
    int rows = 0;
    while (std::getline(in, line)) {
      CHECK(line.substr(line.find(',')) == ",0.25,0.25");
      ++rows;
    }
    CHECK(rows == 9);
    CHECK(rep.self_check);
  }

  TEST_CASE("identical runs are byte-identical across thread counts") {
    auto cfg = load_config("builtin:ou_meanfield_particles");
    cfg.grid["T"] = 0.5;
    const auto r1 = run_experiment(cfg, 1);
    const auto r2 = run_experiment(cfg, 1);
    const auto r8 = run_experiment(cfg, 8);
    REQUIRE(r1.tables.size() == r2.tables.size());
    for (std::size_t i = 0; i < r1.tables.size(); ++i) {
      CHECK(r1.tables[i].csv == r2.tables[i].csv);
      CHECK(r1.tables[i].csv == r8.tables[i].csv);
    }
  }

  TEST_CASE("reports embed a replayable config") {
    const auto cfg = parse_config(kSimple);
    const auto rep = run_experiment(cfg);
    const auto text = render_report(rep, cfg, 0.5);
    CHECK(text.find("config_hash = " + config_hash(cfg)) != std::string::npos);
    CHECK(text.find("seed = 3") != std::string::npos);
    CHECK(config_from_report(text) == cfg);
    const auto tampered = replace(text, "x0 = 0.25", "x0 = 0.5");
    CHECK_THROWS_AS(config_from_report(tampered), ConfigError);
    CHECK_THROWS_AS(config_from_report("nothing here"), ConfigError);

    const auto dir = std::filesystem::temp_directory_path() / "svi_config_test";
    std::filesystem::remove_all(dir);
    const auto files = write_outputs(rep, cfg, dir, 0.5);
    CHECK(std::filesystem::exists(dir / "still.report.txt"));
    CHECK(std::filesystem::exists(dir / "still.paths.csv"));
    CHECK(files.size() == rep.tables.size() + 1);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("registries") {
    CHECK(coefficient_registry().size() >= 4);
    CHECK(psi_registry().size() >= 6);
    CHECK(experiment_registry().size() == 6);
  }
}
