#include "svi/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "svi/convergence.hpp"
#include "svi/csv.hpp"
#include "svi/parallel.hpp"
#include "svi/poc.hpp"

namespace svi {

namespace {

constexpr const char* kVersion = "0.3.0";
constexpr const char* kConfigMarker = "---- config ----";

std::string fmt(double v) { return format_double(v); }

std::string fit_or_reason(std::span<const double> x, std::span<const double> y) {
  try {
    return fit_loglog(x, y).summary();
  } catch (const DegenerateFit& e) {
    return std::string{"not fitted ("} + e.what() + ")";
  }
}

bool in_domain(const ConvexSpec& psi, std::span<const double> xs) {
  const auto& d = psi.domain();
  return std::all_of(xs.begin(), xs.end(), [&](double x) { return d.contains(x); });
}

struct Context {
  const ScenarioConfig& cfg;
  unsigned threads;
  CoefficientPair pair;
  ConvexSpec psi;
  InitialCondition init;
  SchemeConfig scheme;
  double horizon;
  NoiseKey key;
};

void run_simulate(const Context& c, ExperimentReport& r) {
  const std::size_t paths = c.cfg.count(c.cfg.experiment, "paths");
  const std::size_t record = std::min(paths, c.cfg.count(c.cfg.experiment, "record"));
  const EmpiricalMeasure frozen = EmpiricalMeasure::dirac(0.0);
  std::vector<PathRecord> kept(record);
  std::vector<double> terminal(paths), phi(paths), var_phi(paths);
  std::vector<char> confined(paths, 1);
  parallel_for(paths, c.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const NoiseKey key = c.key.with_particle(i);
      PathRecord rec = simulate_frozen(c.pair, c.psi, c.scheme, c.init.sample(key, c.psi), frozen, key, c.horizon);
      terminal[i] = rec.states.back();
      phi[i] = rec.phi.back();
      var_phi[i] = rec.var_phi.back();
      confined[i] = in_domain(c.psi, rec.states);
      if (i < record) kept[i] = std::move(rec);
    }
  });

  std::ostringstream paths_csv;
  {
    std::vector<std::string> cols{"t"};
    for (std::size_t i = 0; i < record; ++i) cols.push_back("X_" + std::to_string(i + 1));
    write_csv_header(paths_csv, cols);
    if (record > 0)
      for (std::size_t k = 0; k < kept.front().states.size(); ++k) {
        std::vector<double> row{kept.front().times[k]};
        for (const auto& p : kept) row.push_back(p.states[k]);
        write_csv_row(paths_csv, row);
      }
  }
  std::ostringstream terminal_csv;
  write_csv_header(terminal_csv, {"path", "X_T", "phi_T", "var_phi_T"});
  for (std::size_t i = 0; i < paths; ++i)
    write_csv_row(terminal_csv, {static_cast<double>(i), terminal[i], phi[i], var_phi[i]});
  r.tables.push_back({"paths", paths_csv.str()});
  r.tables.push_back({"terminal", terminal_csv.str()});

  const EmpiricalMeasure law{terminal};
  r.results.emplace_back("paths", std::to_string(paths));
  r.results.emplace_back("terminal_mean", fmt(law.mean()));
  r.results.emplace_back("terminal_variance", fmt(law.variance()));
  r.results.emplace_back("max_total_variation_phi", fmt(*std::max_element(var_phi.begin(), var_phi.end())));
  const bool ok = std::all_of(confined.begin(), confined.end(), [](char v) { return v != 0; });
  r.self_check = ok;
  r.self_check_detail = ok ? "every state lies in the closed domain" : "a state left the closed domain";
}

void run_particles(const Context& c, ExperimentReport& r) {
  const std::size_t N = c.cfg.count(c.cfg.experiment, "N");
  ParticleOptions opts;
  opts.threads = c.threads;
  opts.record_paths = c.cfg.count(c.cfg.experiment, "record");
  const ParticleEnsemble ens = simulate_particle_system(c.pair, c.psi, c.scheme, c.init, N, c.key, c.horizon, opts);

  std::ostringstream flow, paths, terminal;
  write_flow_summary_csv(flow, ens.measure_flow, c.scheme.dt);
  ens.write_paths_csv(paths);
  write_measure_csv(terminal, ens.measure_flow.back(), ens.measure_flow.size() - 1, r.config_hash);
  r.tables.push_back({"flow", flow.str()});
  r.tables.push_back({"paths", paths.str()});
  r.tables.push_back({"terminal", terminal.str()});

  r.results.emplace_back("N", std::to_string(N));
  r.results.emplace_back("terminal_mean", fmt(ens.measure_flow.back().mean()));
  r.results.emplace_back("terminal_variance", fmt(ens.measure_flow.back().variance()));
  bool confined = true;
  for (const auto& mu : ens.measure_flow) confined = confined && in_domain(c.psi, mu.atoms());
  bool moment_ok = true;
  if (c.init.a0 > 0.0) {
    const ExtReal m = sup_exp_moment(ens.measure_flow, c.init.a0);
    moment_ok = m.is_finite();
    std::ostringstream os;
    os << m;
    r.results.emplace_back("sup_exp_moment_a0", os.str());
  }
  r.self_check = confined && moment_ok;
  r.self_check_detail = !confined ? "a particle left the closed domain"
                        : moment_ok ? "particles confined, exponential moment finite"
                                    : "exponential moment overflowed";
}

void run_picard(const Context& c, ExperimentReport& r) {
  const auto& e = c.cfg.experiment;
  const PicardResult res = picard_solve(c.pair, c.psi, c.scheme, c.init, c.cfg.count(e, "M"),
                                        static_cast<int>(c.cfg.count(e, "K_max")), c.cfg.real(e, "tol"), c.key,
                                        c.horizon, c.threads);
  std::ostringstream it, flow;
  write_csv_header(it, {"iteration", "A", "W1_step"});
  for (const auto& s : res.states) write_csv_row(it, {static_cast<double>(s.iteration), s.A, s.W1_step});
  write_flow_summary_csv(flow, res.measure_flow, c.scheme.dt);
  r.tables.push_back({"picard", it.str()});
  r.tables.push_back({"flow", flow.str()});
  r.results.emplace_back("converged", res.converged ? "true" : "false");
  r.results.emplace_back("iterations", std::to_string(res.states.size()));
  r.results.emplace_back("final_W1_step", fmt(res.states.back().W1_step));
  r.self_check = res.converged;
  r.self_check_detail = res.converged ? "W1_step fell below tol" : "W1_step stayed above tol after K_max iterations";
}

void run_poc_experiment(const Context& c, ExperimentReport& r) {
  const auto& e = c.cfg.experiment;
  std::vector<std::size_t> ns;
  for (double n : c.cfg.list(e, "N_list")) ns.push_back(static_cast<std::size_t>(n));
  PocOptions opts;
  opts.M_ref = c.cfg.count(e, "M_ref");
  opts.trials = c.cfg.count(e, "trials");
  opts.probe_particles = c.cfg.count(e, "probe_particles");
  opts.threads = c.threads;
  const PocTable table = run_poc(c.pair, c.psi, c.scheme, c.init, ns, c.key, c.horizon, opts);
  std::ostringstream os;
  table.write_csv(os);
  r.tables.push_back({"poc", os.str()});

  std::vector<double> x, err, w2;
  for (const auto& row : table.rows) {
    x.push_back(static_cast<double>(row.N));
    err.push_back(row.mean_sup_error);
    w2.push_back(row.w2sq_mean);
  }
  r.results.emplace_back("fit_mean_sup_error", fit_or_reason(x, err));
  r.results.emplace_back("fit_w2sq_mean", fit_or_reason(x, w2));
  r.results.emplace_back("floor_estimate", fmt(table.rows.front().floor_estimate));
  bool decreasing = true;
  for (std::size_t i = 1; i < err.size(); ++i) decreasing = decreasing && err[i] < err[i - 1];
  r.self_check = decreasing;
  r.self_check_detail = decreasing ? "mean_sup_error strictly decreasing in N" : "mean_sup_error not strictly decreasing";
}

void run_validate(const Context& c, ExperimentReport& r) {
  const auto& e = c.cfg.experiment;
  SamplingPlan plan;
  plan.radii = c.cfg.list(e, "radii");
  plan.horizon = c.horizon;
  plan.x_samples = static_cast<int>(c.cfg.count(e, "x_samples"));
  std::string which = c.cfg.word(e, "assumption");
  if (which == "auto") which = c.pair.declared.measure_dependent ? "mean_field" : "local";
  const double radius = *std::max_element(plan.radii.begin(), plan.radii.end());
  const ValidationReport rep = which == "local"
                                   ? validate_assumption1(c.pair, plan)
                                   : validate_assumption2(c.pair, plan, default_measure_sampler(radius, c.cfg.seed));

  std::ostringstream checks;
  checks << "check,estimate,declared,passed,witness_t,witness_x,witness_x2,witness_lhs,witness_rhs\n";
  for (const auto& ch : rep.checks) {
    checks << ch.name << ',' << fmt(ch.estimate) << ',' << fmt(ch.declared) << ',' << (ch.passed ? "true" : "false");
    if (ch.witness)
      checks << ',' << fmt(ch.witness->t) << ',' << fmt(ch.witness->x) << ',' << fmt(ch.witness->x2) << ','
             << fmt(ch.witness->lhs) << ',' << fmt(ch.witness->rhs);
    else
      checks << ",,,,,";
    checks << '\n';
  }
  std::ostringstream radii;
  write_csv_header(radii, {"radius", "growth", "dissipativity", "lipschitz_drift", "hoelder_diffusion"});
  for (const auto& p : rep.per_radius)
    write_csv_row(radii, {p.radius, p.growth_constant, p.dissipativity_constant, p.lipschitz_drift, p.hoelder_diffusion});
  r.tables.push_back({"validation", checks.str()});
  r.tables.push_back({"radii", radii.str()});

  r.results.emplace_back("assumption", rep.assumption);
  r.results.emplace_back("passed", rep.passed() ? "true" : "false");
  r.results.emplace_back("p0_threshold", fmt(rep.p0_threshold));
  for (const auto& ch : rep.checks)
    r.results.emplace_back("check." + ch.name, std::string{ch.passed ? "pass" : "FAIL"} + " estimate=" +
                                                   fmt(ch.estimate) + " declared=" + fmt(ch.declared) +
                                                   (ch.detail.empty() ? "" : " " + ch.detail));
  r.self_check = rep.passed();
  r.self_check_detail = rep.passed() ? "every sampled inequality holds" : "violations: " + std::to_string(rep.violations().size());
}

void run_convergence(const Context& c, ExperimentReport& r) {
  const auto& e = c.cfg.experiment;
  const std::size_t paths = c.cfg.count(e, "paths");
  const auto& n_list = c.cfg.list(e, "n_list");
  const PenalizationStudy pen = penalization_study(c.pair, c.psi, c.init, c.scheme.dt, c.scheme.taming, c.horizon,
                                                   n_list, paths, c.cfg.seed, c.threads);
  const RefinementStudy ref = refinement_study(c.pair, c.psi, c.scheme, c.init,
                                               static_cast<int>(c.cfg.count(e, "levels")), c.horizon, paths,
                                               c.cfg.seed, c.threads);
  std::ostringstream pen_csv, ref_csv;
  write_csv_header(pen_csv, {"n", "mean_sup_diff"});
  std::vector<double> pen_means, ref_means;
  for (std::size_t j = 0; j < n_list.size(); ++j) {
    pen_means.push_back(pen.mean(j));
    write_csv_row(pen_csv, {n_list[j], pen_means.back()});
  }
  write_csv_header(ref_csv, {"dt", "mean_sup_diff"});
  for (std::size_t j = 0; j < ref.dts.size(); ++j) {
    ref_means.push_back(ref.mean(j));
    write_csv_row(ref_csv, {ref.dts[j], ref_means.back()});
  }
  r.tables.push_back({"penalization", pen_csv.str()});
  r.tables.push_back({"refinement", ref_csv.str()});

  r.results.emplace_back("penalization_nonincreasing_fraction", fmt(pen.nonincreasing_fraction()));
  r.results.emplace_back("fit_penalization_vs_n", fit_or_reason(n_list, pen_means));
  r.results.emplace_back("fit_refinement_vs_dt", fit_or_reason(ref.dts, ref_means));
  bool pen_ok = true, ref_ok = true;
  for (std::size_t j = 1; j < pen_means.size(); ++j) pen_ok = pen_ok && pen_means[j] <= pen_means[j - 1];
  for (std::size_t j = 1; j < ref_means.size(); ++j) ref_ok = ref_ok && ref_means[j] < ref_means[j - 1];
  const bool unconstrained = std::all_of(ref_means.begin(), ref_means.end(), [](double v) { return v == 0.0; });
  r.self_check = pen_ok && (ref_ok || unconstrained);
  r.self_check_detail = std::string{pen_ok ? "penalization error nonincreasing in n" : "penalization error increased"} +
                        "; " + (ref_ok ? "refinement error strictly decreasing" : "refinement error not strictly decreasing");
}

}  // namespace

std::string library_version() { return kVersion; }

ExperimentReport run_experiment(const ScenarioConfig& cfg, unsigned threads) {
  const Context c{cfg,
                  threads,
                  build_coefficients(cfg),
                  build_psi(cfg),
                  build_initial(cfg),
                  build_scheme(cfg),
                  cfg.horizon(),
                  NoiseKey{cfg.seed, 0, StreamTag::ParticleSystem}};
  ExperimentReport r;
  r.scenario = cfg.name;
  r.kind = cfg.experiment_kind();
  r.config_hash = config_hash(cfg);
  r.seed = cfg.seed;
  if (r.kind == "simulate") run_simulate(c, r);
  else if (r.kind == "particles") run_particles(c, r);
  else if (r.kind == "picard") run_picard(c, r);
  else if (r.kind == "poc") run_poc_experiment(c, r);
  else if (r.kind == "validate") run_validate(c, r);
  else if (r.kind == "convergence") run_convergence(c, r);
  else throw ConfigError("unknown experiment kind '" + r.kind + "'");
  return r;
}

std::string render_report(const ExperimentReport& r, const ScenarioConfig& cfg, double wall_seconds) {
  std::ostringstream os;
  os << "svi experiment report\n";
  os << "version = " << kVersion << '\n';
  os << "scenario = " << r.scenario << '\n';
  os << "experiment = " << r.kind << '\n';
  os << "config_hash = " << r.config_hash << '\n';
  os << "seed = " << r.seed << '\n';
  os << "stream_layout = philox4x32-10 keyed by seed; counter words (step, particle, lane, tag); tags "
        "particle_system=0 limit_process=1 picard_shared=2\n";
  os << "wall_time_seconds = " << std::fixed << wall_seconds << std::defaultfloat << '\n';
  os << "self_check = " << (r.self_check ? "pass" : "fail") << " (" << r.self_check_detail << ")\n";
  os << "\n[results]\n";
  for (const auto& [k, v] : r.results) os << k << " = " << v << '\n';
  os << "\n[tables]\n";
  for (const auto& t : r.tables) os << r.scenario << '.' << t.name << ".csv\n";
  os << '\n' << kConfigMarker << '\n' << serialize(cfg);
  return os.str();
}

std::vector<std::filesystem::path> write_outputs(const ExperimentReport& report, const ScenarioConfig& cfg,
                                                 const std::filesystem::path& dir, double wall_seconds) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  const auto emit = [&](const std::string& file, const std::string& body) {
    const auto path = dir / file;
    std::ofstream out{path, std::ios::binary};
    out << body;
    if (!out) throw Error("cannot write " + path.string());
    written.push_back(path);
  };
  for (const auto& t : report.tables) emit(cfg.name + "." + t.name + ".csv", t.csv);
  emit(cfg.name + ".report.txt", render_report(report, cfg, wall_seconds));
  return written;
}

ScenarioConfig config_from_report(std::string_view text) {
  const std::string marker = std::string{kConfigMarker} + "\n";
  const auto at = text.find(marker);
  if (at == std::string_view::npos) throw ConfigError("report has no embedded config");
  const auto hash_at = text.find("config_hash = ");
  if (hash_at == std::string_view::npos) throw ConfigError("report has no config_hash line");
  const auto hash = text.substr(hash_at + 14, 16);
  ScenarioConfig cfg = parse_config(text.substr(at + marker.size()), "report");
  if (config_hash(cfg) != hash)
    throw ConfigError("embedded config hashes to " + config_hash(cfg) + ", report records " + std::string{hash});
  return cfg;
}

}  // namespace svi
