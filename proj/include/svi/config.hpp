#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "svi/coefficients.hpp"
#include "svi/convex.hpp"
#include "svi/errors.hpp"
#include "svi/mckean_vlasov.hpp"
#include "svi/schemes.hpp"

// Scenario files: a small INI dialect.
//
//   # comment (also allowed after a value)
//   name = toy_cubic          top-level keys come before the first section
//   seed = 42
//   [psi]
//   key = indicator_interval
//   lo = -2
//   hi = inf                  numbers accept inf / -inf
//   [experiment]
//   kind = poc
//   N_list = 64, 256, 1024    comma-separated numeric lists
//   [coefficients]
//   drift = "x - 2*x^3"       quoted strings, with \" and \\ escapes
//
// Bare words are strings, `true` / `false` are booleans. Sections and keys
// may appear once. Every loaded config is fully validated: unknown sections
// or keys, wrong types and violated ranges are collected and reported
// together, and defaults are filled in so the stored value is canonical.

namespace svi {

class ParseError : public ConfigError {
 public:
  ParseError(const std::string& origin, int line, int column, const std::string& msg);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class ValidationError : public ConfigError {
 public:
  explicit ValidationError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

using ConfigValue = std::variant<double, bool, std::string, std::vector<double>>;
using ConfigSection = std::map<std::string, ConfigValue>;

struct ScenarioConfig {
  std::string name;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  ConfigSection coefficients;  // discriminated by "key"
  ConfigSection psi;           // discriminated by "key"
  ConfigSection initial;       // discriminated by "kind"
  ConfigSection scheme;        // discriminated by "kind"
  ConfigSection grid;
  ConfigSection experiment;  // discriminated by "kind"

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;

  double real(const ConfigSection& s, const std::string& key) const;
  std::size_t count(const ConfigSection& s, const std::string& key) const;
  const std::string& word(const ConfigSection& s, const std::string& key) const;
  const std::vector<double>& list(const ConfigSection& s, const std::string& key) const;
  bool flag(const ConfigSection& s, const std::string& key) const;

  const std::string& experiment_kind() const { return word(experiment, "kind"); }
  double horizon() const { return real(grid, "T"); }
  double dt() const { return real(grid, "dt"); }
};

/// Parses and validates; `origin` names the source in error messages.
ScenarioConfig parse_config(std::string_view text, const std::string& origin = "<string>");

/// Reads a file, or a built-in scenario when the path is "builtin:<name>"
/// or names a built-in "<name>.scenario" that does not exist on disk.
ScenarioConfig load_config(const std::string& path);

/// Canonical text form; parse_config(serialize(c)) == c.
std::string serialize(const ScenarioConfig& cfg);

/// 16 hex digits of FNV-1a over the canonical text.
std::string config_hash(const ScenarioConfig& cfg);

CoefficientPair build_coefficients(const ScenarioConfig& cfg);
ConvexSpec build_psi(const ScenarioConfig& cfg);
InitialCondition build_initial(const ScenarioConfig& cfg);
SchemeConfig build_scheme(const ScenarioConfig& cfg);

struct RegistryEntry {
  std::string key;
  std::string description;
  std::vector<std::string> parameters;
};

std::vector<RegistryEntry> coefficient_registry();
std::vector<RegistryEntry> psi_registry();
std::vector<RegistryEntry> experiment_registry();

struct BuiltinScenario {
  std::string name;
  std::string text;
};

/// Scenario files shipped with the tool, embedded at build time.
const std::vector<BuiltinScenario>& builtin_scenarios();

}  // namespace svi
