#ifndef PLANAR_MHD_COMMANDS_HPP
#define PLANAR_MHD_COMMANDS_HPP

// Subcommand drivers behind the command-line tool. Each returns a process
// exit status:
//   0  success
//   2  configuration or argument error
//   3  compatibility failure under --strict-compat
//   4  solver failure
// Output directory precedence: --out flag, then PLANAR_MHD_OUT, then the
// config's output_dir.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "planar_mhd/config.hpp"
#include "planar_mhd/core.hpp"
#include "planar_mhd/diagnostics.hpp"
#include "planar_mhd/initdata.hpp"
#include "planar_mhd/io.hpp"
#include "planar_mhd/solver.hpp"
#include "planar_mhd/verification.hpp"

namespace planar_mhd {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitCompat = 3, kExitSolver = 4 };

struct CommandOptions {
  std::optional<std::string> config_path;
  std::optional<std::string> out_dir;
  bool strict_compat = false;
  std::uint64_t seed = 0;
  std::optional<std::string> scenario;
  std::vector<double> deltas{1e-1, 1e-2, 1e-3, 1e-4};
  std::vector<std::size_t> resolutions{64, 128, 256};
  std::string mms_case = "smooth-wave";
  std::optional<std::string> input;
};

inline std::filesystem::path resolve_output_dir(const std::optional<std::string>& flag, const RunConfig& cfg) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv("PLANAR_MHD_OUT"); env != nullptr && *env != '\0') return env;
  return cfg.output_dir;
}

/// Mirrors messages to a console stream and, once opened, to <out>/run.log.
class RunLog {
 public:
  explicit RunLog(std::ostream& console) : console_(console) {}

  void open(const std::filesystem::path& path) {
    file_.open(path, std::ios::out | std::ios::trunc);
    for (const auto& line : pending_) file_ << line << '\n';
    pending_.clear();
  }

  void info(const std::string& msg) { emit("info: " + msg); }
  void warn(const std::string& msg) { emit("warning: " + msg); }
  void error(const std::string& msg) { emit("error: " + msg); }

 private:
  void emit(const std::string& line) {
    console_ << line << '\n';
    if (file_.is_open()) {
      file_ << line << '\n';
      file_.flush();
    } else {
      pending_.push_back(line);
    }
  }

  std::ostream& console_;
  std::ofstream file_;
  std::vector<std::string> pending_;
};

namespace detail {

inline RunConfig load_config(const CommandOptions& opts) {
  if (!opts.config_path) return parse_config("");
  std::ifstream in(*opts.config_path);
  if (!in) throw ConfigError("cannot open config '" + *opts.config_path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(*opts.config_path + ": " + e.what());
  }
}

struct Setup {
  RunConfig cfg;
  std::filesystem::path out;
};

/// Loads the config and prepares the output directory; on failure logs the
/// error (to run.log where possible) and returns nullopt.
inline std::optional<Setup> prepare(const CommandOptions& opts, RunLog& log) {
  RunConfig cfg;
  std::optional<std::string> config_error;
  try {
    cfg = load_config(opts);
  } catch (const ConfigError& e) {
    config_error = e.what();
  }
  Setup s{cfg, resolve_output_dir(opts.out_dir, cfg)};
  std::error_code ec;
  std::filesystem::create_directories(s.out, ec);
  if (!ec) log.open(s.out / "run.log");
  if (config_error) {
    log.error("config: " + *config_error);
    return std::nullopt;
  }
  if (ec) {
    log.error("cannot create output directory '" + s.out.string() + "': " + ec.message());
    return std::nullopt;
  }
  return s;
}

struct Problem {
  InitialData data;
  Grid grid;
};

/// Library scenario by name, otherwise an initial table read from a path.
inline Problem load_problem(const std::string& scenario_or_path, std::size_t n_cells) {
  for (const auto& name : scenario_names()) {
    if (name == scenario_or_path) {
      const Grid grid(n_cells);
      return {scenario(name, grid), grid};
    }
  }
  if (!std::filesystem::exists(scenario_or_path)) {
    throw LookupError("unknown scenario '" + scenario_or_path + "' (not a library name or a readable file)");
  }
  InitialData d = read_initial_table(scenario_or_path);
  const Grid grid(d.size());
  return {std::move(d), grid};
}

inline std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_real(v[i]);
  return s;
}

}  // namespace detail

inline int simulate_command(const CommandOptions& opts, std::ostream& console = std::cerr) {
  RunLog log(console);
  auto setup = detail::prepare(opts, log);
  if (!setup) return kExitConfig;
  RunConfig& cfg = setup->cfg;
  if (opts.scenario) cfg.scenario = *opts.scenario;
  const auto& out = setup->out;

  std::optional<detail::Problem> problem;
  try {
    problem = detail::load_problem(cfg.scenario, cfg.n_cells);
    if (cfg.delta > 0.0) problem->data = regularize(problem->data, cfg.delta);
    problem->data.validate();
  } catch (const std::exception& e) {
    log.error("initial data: " + std::string(e.what()));
    return kExitConfig;
  }
  const Grid& grid = problem->grid;
  write_file(out / "config.txt", render(cfg));
  log.info("simulate scenario=" + cfg.scenario + " n_cells=" + std::to_string(grid.n_cells()) +
           " t_end=" + format_real(cfg.t_end));

  const auto compat = compatibility_residuals(problem->data, grid, cfg.params);
  std::ostringstream cm;
  cm << "compatibility g1=" << format_real(compat.g1_norm) << " g2=" << format_real(compat.g2_norm)
     << " g3=" << format_real(compat.g3_norm) << " vacuum_violation=" << format_real(compat.worst_vacuum_violation)
     << " tolerance=" << format_real(compat.tolerance);
  if (compat.passed) {
    log.info(cm.str() + " passed");
  } else if (opts.strict_compat) {
    log.error(cm.str() + " failed (strict mode)");
    return kExitCompat;
  } else {
    log.warn(cm.str() + " failed");
  }

  std::ofstream csv(out / "diagnostics.csv", std::ios::binary | std::ios::trunc);
  if (!csv) {
    log.error("cannot write diagnostics.csv");
    return kExitConfig;
  }
  DiagnosticsCsvWriter writer(csv);
  RunMonitor monitor;
  DiagnosticsRecord last;
  std::size_t steps = 0, picard_total = 0, snapshot_index = 0;

  std::vector<double> snaps = cfg.snapshot_times;
  std::sort(snaps.begin(), snaps.end());
  snaps.erase(std::unique(snaps.begin(), snaps.end()), snaps.end());

  RunHooks hooks;
  hooks.record_every = cfg.record_every;
  hooks.alpha = cfg.effective_alpha();
  hooks.sink = [&](const DiagnosticsRecord& r) {
    writer.write(r);
    monitor.observe(r);
    last = r;
  };
  hooks.on_step = [&](const State&, const State&, const StepReport& rep) {
    ++steps;
    picard_total += rep.picard_iters;
  };
  hooks.stop_times = snaps;
  hooks.on_stop = [&](const State& s) {
    std::ostringstream buf;
    write_snapshot(buf, s, grid);
    write_file(out / snapshot_name(snapshot_index++), buf.str());
  };

  const auto t0 = std::chrono::steady_clock::now();
  State final_state = problem->data.to_state();
  try {
    final_state = run(problem->data, cfg.t_end, grid, cfg.params, cfg.scheme(), hooks);
  } catch (const SolverError& e) {
    log.error("solver: " + std::string(e.what()) + " residual=" + format_real(e.residual()));
    return kExitSolver;
  } catch (const std::exception& e) {
    log.error("solver: " + std::string(e.what()));
    return kExitSolver;
  }
  csv.close();
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  Summary sum;
  sum.set("scenario", cfg.scenario);
  sum.set("n_cells", std::to_string(grid.n_cells()));
  sum.set("t_end", cfg.t_end);
  sum.set("steps", std::to_string(steps));
  sum.set("picard_iters_total", std::to_string(picard_total));
  sum.set("alpha", cfg.effective_alpha());
  sum.set("compat_passed", compat.passed);
  sum.set("mass_initial", monitor.mass0);
  sum.set("mass_final", last.mass);
  sum.set("mass_max_drift", monitor.max_mass_drift);
  sum.set("energy_initial", monitor.energy0);
  sum.set("energy_final", last.energy);
  sum.set("energy_rel_drift", monitor.last_energy_rel_drift);
  sum.set("entropy_fn_max", monitor.max_entropy_fn);
  sum.set("entropy_prod_cum", last.entropy_prod_cum);
  sum.set("entropy_prod_monotone", monitor.entropy_prod_monotone);
  sum.set("rho_F_max_rise", monitor.rho_F_max_rise);
  sum.set("rho_F_monitor_ok", monitor.rho_F_max_rise <= 0.02);
  sum.set("min_rho", monitor.min_rho);
  sum.set("min_theta", monitor.min_theta);
  try {
    sum.set("embedding_worst_ratio", embedding_check(final_state, grid, 100, opts.seed));
    for (double r : {1.0, 2.0, cfg.params.q_exp + 1.0}) {
      sum.set("embedding_theta_pow_" + format_real(r), embedding_power_ratio(final_state, grid, r));
    }
  } catch (const DomainError& e) {
    sum.set("embedding_worst_ratio", std::string("n/a (") + e.what() + ")");
  }
  for (const auto& [k, v] : last.norms) sum.set("final." + k, v);
  std::ostringstream sbuf;
  sum.write(sbuf);
  write_file(out / "run_summary.txt", sbuf.str());
  log.info("done: steps=" + std::to_string(steps) + " wall_seconds=" + format_real(wall));
  return kExitOk;
}

inline int continuation_command(const CommandOptions& opts, std::ostream& console = std::cerr) {
  RunLog log(console);
  auto setup = detail::prepare(opts, log);
  if (!setup) return kExitConfig;
  const RunConfig& cfg = setup->cfg;
  const std::string name = opts.scenario.value_or(cfg.scenario);
  std::optional<detail::Problem> problem;
  try {
    problem = detail::load_problem(name, cfg.n_cells);
  } catch (const std::exception& e) {
    log.error("initial data: " + std::string(e.what()));
    return kExitConfig;
  }
  log.info("continuation scenario=" + name + " deltas=" + detail::join(opts.deltas));
  ContinuationReport rep;
  try {
    rep = continuation_study(problem->data, opts.deltas, cfg.t_end, problem->grid, cfg.params, cfg.scheme());
  } catch (const DomainError& e) {
    log.error("continuation: " + std::string(e.what()));
    return kExitConfig;
  }
  StudyTable table{"continuation " + name + " t_end=" + format_real(cfg.t_end) +
                       " monotone=" + (rep.monotone ? "yes" : "no"),
                   {"delta_from", "delta_to", "distance"},
                   {}};
  for (const auto& d : rep.pairwise_dists) {
    table.rows.push_back({format_real(d.delta_from), format_real(d.delta_to), format_real(d.distance)});
  }
  write_study(setup->out, "continuation", table);
  bool failed = false;
  for (std::size_t k = 0; k < rep.deltas.size(); ++k) {
    if (!rep.failures[k].empty()) {
      log.error("delta=" + format_real(rep.deltas[k]) + ": " + rep.failures[k]);
      failed = true;
    }
  }
  log.info(std::string("monotone=") + (rep.monotone ? "yes" : "no"));
  return failed ? kExitSolver : kExitOk;
}

inline int mms_command(const CommandOptions& opts, std::ostream& console = std::cerr) {
  RunLog log(console);
  auto setup = detail::prepare(opts, log);
  if (!setup) return kExitConfig;
  const RunConfig& cfg = setup->cfg;
  std::optional<MMSCase> mms;
  try {
    mms.emplace(mms_case(opts.mms_case, cfg.params));
  } catch (const std::exception& e) {
    log.error("mms: " + std::string(e.what()));
    return kExitConfig;
  }
  log.info("mms case=" + opts.mms_case);
  MMSResult res;
  try {
    res = mms_convergence(*mms, opts.resolutions, cfg.t_end, cfg.scheme());
  } catch (const DomainError& e) {
    log.error("mms: " + std::string(e.what()));
    return kExitConfig;
  } catch (const std::exception& e) {
    log.error("mms solver: " + std::string(e.what()));
    return kExitSolver;
  }
  StudyTable table{"mms " + res.case_name + " t_end=" + format_real(cfg.t_end), {"n_cells"}, {}};
  for (const char* f : kMmsFieldNames) table.headers.push_back(std::string("err_") + f);
  for (std::size_t r = 0; r < res.resolutions.size(); ++r) {
    std::vector<std::string> row{std::to_string(res.resolutions[r])};
    for (double e : res.errors[r]) row.push_back(format_real(e));
    table.rows.push_back(row);
  }
  std::vector<std::string> orders{"order"};
  for (const auto& o : res.orders) orders.push_back(o ? format_real(*o) : "exact");
  table.rows.push_back(orders);
  write_study(setup->out, "mms", table);
  std::string line = "orders:";
  for (std::size_t f = 0; f < kMmsFieldCount; ++f) line += std::string(" ") + kMmsFieldNames[f] + "=" + orders[f + 1];
  log.info(line);
  return kExitOk;
}

/// Recomputes the diagnostics suite over the snapshots stored in a directory.
/// Increments between consecutive snapshots use their time difference as dt.
inline int audit_command(const CommandOptions& opts, std::ostream& console = std::cerr) {
  RunLog log(console);
  auto setup = detail::prepare(opts, log);
  if (!setup) return kExitConfig;
  const std::filesystem::path input = opts.input.value_or(setup->out.string());
  const auto files = list_snapshots(input);
  if (files.empty()) {
    log.error("audit: no snapshots in '" + input.string() + "'");
    return kExitConfig;
  }
  std::vector<State> states;
  try {
    for (const auto& f : files) states.push_back(read_snapshot(f));
  } catch (const std::exception& e) {
    log.error("audit: " + std::string(e.what()));
    return kExitConfig;
  }
  std::stable_sort(states.begin(), states.end(), [](const State& a, const State& b) { return a.time() < b.time(); });
  const Grid grid(states.front().size());
  for (const auto& s : states) {
    if (s.size() != grid.n_cells()) {
      log.error("audit: snapshots have different cell counts");
      return kExitConfig;
    }
  }
  const RunConfig& cfg = setup->cfg;
  std::ostringstream csv;
  DiagnosticsCsvWriter writer(csv);
  RunMonitor monitor;
  try {
    DiagnosticsTracker tracker(grid, cfg.params, cfg.effective_alpha(), states.front());
    writer.write(tracker.record());
    monitor.observe(tracker.record());
    for (std::size_t k = 1; k < states.size(); ++k) {
      const double dt = states[k].time() - states[k - 1].time();
      if (!(dt > 0.0)) continue;
      tracker.advance(states[k - 1], states[k], dt);
      writer.write(tracker.record());
      monitor.observe(tracker.record());
    }
  } catch (const std::exception& e) {
    log.error("audit: " + std::string(e.what()));
    return kExitConfig;
  }
  write_file(setup->out / "audit.csv", csv.str());
  StudyTable table{"audit " + input.string(), {"quantity", "value"}, {}};
  table.rows.push_back({"snapshots", std::to_string(states.size())});
  table.rows.push_back({"mass_max_drift", format_real(monitor.max_mass_drift)});
  table.rows.push_back({"energy_rel_drift", format_real(monitor.last_energy_rel_drift)});
  table.rows.push_back({"entropy_fn_max", format_real(monitor.max_entropy_fn)});
  table.rows.push_back({"entropy_prod_monotone", monitor.entropy_prod_monotone ? "yes" : "no"});
  table.rows.push_back({"rho_F_max_rise", format_real(monitor.rho_F_max_rise)});
  table.rows.push_back({"min_theta", format_real(monitor.min_theta)});
  write_study(setup->out, "audit_report", table);
  log.info("audit: " + std::to_string(states.size()) + " snapshots");
  return kExitOk;
}

}  // namespace planar_mhd

#endif  // PLANAR_MHD_COMMANDS_HPP
