// planar_mhd: simulate | continuation | mms | audit

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "planar_mhd/commands.hpp"

namespace {

template <class T>
bool parse_list(const std::string& text, std::vector<T>& out) {
  out.clear();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::istringstream one(item);
    T v{};
    if (!(one >> v) || !(one >> std::ws).eof()) return false;
    out.push_back(v);
  }
  return !out.empty();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace planar_mhd;
  CLI::App app{"Planar compressible MHD solver with diagnostics and verification studies"};
  app.require_subcommand(1);

  CommandOptions opts;
  std::string config_path, out_dir, scenario, deltas, resolutions, input;
  app.add_option("--config", config_path, "key = value run configuration");
  app.add_option("--out", out_dir, "output directory (overrides PLANAR_MHD_OUT and the config)");
  app.add_flag("--strict-compat", opts.strict_compat, "fail (exit 3) when the compatibility check fails");
  app.add_option("--seed", opts.seed, "seed for the random test functions of the embedding check");

  auto* sim = app.add_subcommand("simulate", "run one simulation and write diagnostics, snapshots and a summary");
  sim->add_option("--scenario", scenario, "override the config scenario");
  auto* cont = app.add_subcommand("continuation", "rho0 + delta continuation study");
  cont->add_option("--scenario", scenario, "base scenario (default: config scenario)");
  cont->add_option("--deltas", deltas, "comma-separated decreasing deltas");
  auto* mms = app.add_subcommand("mms", "manufactured-solution convergence study");
  mms->add_option("--case", opts.mms_case, "smooth-wave | constant");
  mms->add_option("--resolutions", resolutions, "comma-separated increasing cell counts");
  auto* audit = app.add_subcommand("audit", "recompute diagnostics over stored snapshots");
  audit->add_option("--input", input, "directory holding snapshot_*.txt");

  for (auto* sub : {sim, cont, mms, audit}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (!config_path.empty()) opts.config_path = config_path;
  if (!out_dir.empty()) opts.out_dir = out_dir;
  if (!scenario.empty()) opts.scenario = scenario;
  if (!input.empty()) opts.input = input;
  if (!deltas.empty() && !parse_list(deltas, opts.deltas)) {
    std::cerr << "error: --deltas: expected comma-separated reals\n";
    return kExitConfig;
  }
  if (!resolutions.empty() && !parse_list(resolutions, opts.resolutions)) {
    std::cerr << "error: --resolutions: expected comma-separated integers\n";
    return kExitConfig;
  }

  if (sim->parsed()) return simulate_command(opts);
  if (cont->parsed()) return continuation_command(opts);
  if (mms->parsed()) return mms_command(opts);
  return audit_command(opts);
}
