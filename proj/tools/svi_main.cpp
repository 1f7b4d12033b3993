// svi: command-line front end for scenario files.
//
//   svi run <scenario> [--threads N] [--self-test]
//   svi validate <scenario>
//   svi list-registry
//   svi replay <report> [--threads N] [--self-test]
//
// <scenario> is a path or builtin:<name>. SVI_OUTPUT_DIR overrides the
// output directory named in the scenario.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "svi/experiments.hpp"

namespace {

enum Exit : int { kOk = 0, kConfig = 2, kRuntime = 3, kSelfTest = 4 };

int execute(const svi::ScenarioConfig& cfg, unsigned threads, bool self_test) {
  const auto start = std::chrono::steady_clock::now();
  const svi::ExperimentReport report = svi::run_experiment(cfg, threads);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const char* env = std::getenv("SVI_OUTPUT_DIR");
  const std::filesystem::path dir = env && *env ? env : cfg.output_dir;
  for (const auto& p : svi::write_outputs(report, cfg, dir, wall)) std::cout << "wrote " << p.string() << '\n';
  for (const auto& [k, v] : report.results) std::cout << k << " = " << v << '\n';
  std::cout << "self_check = " << (report.self_check ? "pass" : "fail") << " (" << report.self_check_detail << ")\n";
  return self_test && !report.self_check ? kSelfTest : kOk;
}

std::string read_file(const std::string& path) {
  std::ifstream in{path, std::ios::binary};
  if (!in) throw svi::ConfigError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void list_registry() {
  const auto show = [](const char* title, const std::vector<svi::RegistryEntry>& entries) {
    std::cout << title << ":\n";
    for (const auto& e : entries) {
      std::cout << "  " << e.key << " - " << e.description;
      if (!e.parameters.empty()) {
        std::cout << " [";
        for (std::size_t i = 0; i < e.parameters.size(); ++i) std::cout << (i ? ", " : "") << e.parameters[i];
        std::cout << ']';
      }
      std::cout << '\n';
    }
  };
  show("coefficients", svi::coefficient_registry());
  show("psi", svi::psi_registry());
  show("experiments", svi::experiment_registry());
  std::cout << "built-in scenarios (builtin:<name>):\n";
  for (const auto& b : svi::builtin_scenarios()) std::cout << "  " << b.name << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation of stochastic variational inequalities and their mean-field limits"};
  app.require_subcommand(1);
  std::string target;
  unsigned threads = 1;
  bool self_test = false;

  auto* run = app.add_subcommand("run", "run a scenario and write its report and CSV tables");
  run->add_option("scenario", target, "scenario file or builtin:<name>")->required();
  run->add_option("--threads", threads, "worker cap, 0 = all cores; never changes results");
  run->add_flag("--self-test", self_test, "exit 4 when the experiment's own acceptance property fails");

  auto* validate = app.add_subcommand("validate", "load and validate a scenario, print its canonical form");
  validate->add_option("scenario", target, "scenario file or builtin:<name>")->required();

  app.add_subcommand("list-registry", "list coefficient, psi and experiment registries");

  auto* replay = app.add_subcommand("replay", "re-run the config embedded in a report");
  replay->add_option("report", target, "a <name>.report.txt file")->required();
  replay->add_option("--threads", threads, "worker cap, 0 = all cores");
  replay->add_flag("--self-test", self_test, "exit 4 when the experiment's own acceptance property fails");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (run->parsed()) return execute(svi::load_config(target), threads, self_test);
    if (validate->parsed()) {
      const auto cfg = svi::load_config(target);
      std::cout << "# config_hash = " << svi::config_hash(cfg) << '\n' << svi::serialize(cfg);
      return kOk;
    }
    if (replay->parsed()) return execute(svi::config_from_report(read_file(target)), threads, self_test);
    list_registry();
    return kOk;
  } catch (const svi::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const svi::InvalidParams& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << '\n';
    return kRuntime;
  }
}
