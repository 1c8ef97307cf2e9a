#ifndef PLANAR_MHD_CONFIG_HPP
#define PLANAR_MHD_CONFIG_HPP

// Flat "key = value" run configuration. '#' starts a comment; blank lines are
// ignored; each key may appear once.
//
//   key               default          notes
//   scenario          uniform-rest     library name or path to an 8-column table
//   n_cells           128              ignored for table input (rows decide)
//   t_end             0.1
//   cfl               0.5
//   dt_max            1
//   picard_tol        1e-10
//   picard_max_iters  50
//   delta             0                added to rho0 when > 0
//   output_dir        planar_mhd_out
//   record_every      1
//   alpha             min(1, q_exp)/2  weighted-dissipation exponent
//   snapshot_times    (none)           comma-separated
//   lambda_visc mu_visc nu_mag gas_R c_v kappa_a kappa_b q_exp   all 1

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "planar_mhd/core.hpp"
#include "planar_mhd/solver.hpp"

namespace planar_mhd {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string scenario = "uniform-rest";
  std::size_t n_cells = 128;
  double t_end = 0.1;
  double cfl = 0.5;
  double dt_max = 1.0;
  double picard_tol = 1e-10;
  std::size_t picard_max_iters = 50;
  double delta = 0.0;
  std::string output_dir = "planar_mhd_out";
  std::size_t record_every = 1;
  std::optional<double> alpha;
  std::vector<double> snapshot_times;
  PhysParams params;

  double effective_alpha() const { return alpha ? *alpha : default_alpha(params); }

  SchemeConfig scheme() const {
    SchemeConfig s;
    s.cfl = cfl;
    s.dt_max = dt_max;
    s.picard_tol = picard_tol;
    s.picard_max_iters = picard_max_iters;
    return s;
  }

  /// Throws ConfigError naming the violated constraint.
  void validate() const {
    auto fail = [](const std::string& m) { throw ConfigError(m); };
    if (scenario.empty()) fail("scenario: must not be empty");
    if (n_cells < 4) fail("n_cells: must be >= 4");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) fail("t_end: must be >= 0");
    if (!(cfl > 0.0 && cfl <= 1.0)) fail("cfl: must lie in (0, 1]");
    if (!(dt_max > 0.0)) fail("dt_max: must be > 0");
    if (!(picard_tol > 0.0)) fail("picard_tol: must be > 0");
    if (picard_max_iters == 0) fail("picard_max_iters: must be >= 1");
    if (!(delta >= 0.0) || !std::isfinite(delta)) fail("delta: must be >= 0");
    if (output_dir.empty()) fail("output_dir: must not be empty");
    if (record_every == 0) fail("record_every: must be >= 1");
    if (!(params.q_exp > 0.0)) fail("q_exp: q must be > 0 (heat-conductivity growth hypothesis kappa >= C^-1 (1 + theta^q))");
    try {
      params.validate();
    } catch (const DomainError& e) {
      fail(e.what());
    }
    if (alpha && !alpha_admissible(*alpha, params)) {
      fail("alpha: must satisfy 0 < alpha < min(1, q) (weighted dissipation interval), got alpha = " +
           std::to_string(*alpha) + " with q = " + std::to_string(params.q_exp));
    }
    for (double ts : snapshot_times) {
      if (!(ts >= 0.0 && ts <= t_end)) fail("snapshot_times: every entry must lie in [0, t_end]");
    }
  }

  bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline double parse_real(std::string_view v, const std::string& where) {
  v = trim(v);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError(where + ": expected a real number, got '" + std::string(v) + "'");
  }
  return out;
}

inline std::size_t parse_count(std::string_view v, const std::string& where) {
  v = trim(v);
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError(where + ": expected a nonnegative integer, got '" + std::string(v) + "'");
  }
  return out;
}

inline std::vector<double> parse_real_list(std::string_view v, const std::string& where) {
  std::vector<double> out;
  v = trim(v);
  if (v.empty()) return out;
  while (true) {
    const auto comma = v.find(',');
    out.push_back(parse_real(v.substr(0, comma), where));
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  return out;
}

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Parses a config document. Throws ConfigError with the line number for
/// malformed lines, unknown keys and duplicates, and the constraint name for
/// validation failures.
inline RunConfig parse_config(std::string_view text) {
  RunConfig c;
  std::map<std::string, std::size_t> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string_view value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": missing key");
    if (seen.count(key)) {
      throw ConfigError(where + ": duplicate key '" + key + "' (first on line " + std::to_string(seen[key]) + ")");
    }
    seen[key] = line_no;
    const std::string kw = where + " (" + key + ")";

    if (key == "scenario") {
      if (value.empty()) throw ConfigError(kw + ": empty value");
      c.scenario = std::string(value);
    } else if (key == "output_dir") {
      if (value.empty()) throw ConfigError(kw + ": empty value");
      c.output_dir = std::string(value);
    } else if (key == "n_cells") {
      c.n_cells = detail::parse_count(value, kw);
    } else if (key == "record_every") {
      c.record_every = detail::parse_count(value, kw);
    } else if (key == "picard_max_iters") {
      c.picard_max_iters = detail::parse_count(value, kw);
    } else if (key == "snapshot_times") {
      c.snapshot_times = detail::parse_real_list(value, kw);
    } else if (key == "alpha") {
      c.alpha = detail::parse_real(value, kw);
    } else {
      static const std::map<std::string, double RunConfig::*> top = {
          {"t_end", &RunConfig::t_end}, {"cfl", &RunConfig::cfl},     {"dt_max", &RunConfig::dt_max},
          {"delta", &RunConfig::delta}, {"picard_tol", &RunConfig::picard_tol}};
      static const std::map<std::string, double PhysParams::*> phys = {
          {"lambda_visc", &PhysParams::lambda_visc}, {"mu_visc", &PhysParams::mu_visc},
          {"nu_mag", &PhysParams::nu_mag},           {"gas_R", &PhysParams::gas_R},
          {"c_v", &PhysParams::c_v},                 {"kappa_a", &PhysParams::kappa_a},
          {"kappa_b", &PhysParams::kappa_b},         {"q_exp", &PhysParams::q_exp}};
      if (auto it = top.find(key); it != top.end()) {
        c.*(it->second) = detail::parse_real(value, kw);
      } else if (auto jt = phys.find(key); jt != phys.end()) {
        c.params.*(jt->second) = detail::parse_real(value, kw);
      } else {
        throw ConfigError(where + ": unknown key '" + key + "'");
      }
    }
  }
  c.validate();
  return c;
}

/// Inverse of parse_config: every field on its own line, reals with 17
/// significant digits.
inline std::string render(const RunConfig& c) {
  using detail::format_real;
  std::ostringstream out;
  out << "scenario = " << c.scenario << '\n'
      << "n_cells = " << c.n_cells << '\n'
      << "t_end = " << format_real(c.t_end) << '\n'
      << "cfl = " << format_real(c.cfl) << '\n'
      << "dt_max = " << format_real(c.dt_max) << '\n'
      << "picard_tol = " << format_real(c.picard_tol) << '\n'
      << "picard_max_iters = " << c.picard_max_iters << '\n'
      << "delta = " << format_real(c.delta) << '\n'
      << "output_dir = " << c.output_dir << '\n'
      << "record_every = " << c.record_every << '\n';
  if (c.alpha) out << "alpha = " << format_real(*c.alpha) << '\n';
  out << "snapshot_times = ";
  for (std::size_t i = 0; i < c.snapshot_times.size(); ++i) {
    out << (i ? "," : "") << format_real(c.snapshot_times[i]);
  }
  out << '\n';
  const PhysParams& p = c.params;
  out << "lambda_visc = " << format_real(p.lambda_visc) << '\n'
      << "mu_visc = " << format_real(p.mu_visc) << '\n'
      << "nu_mag = " << format_real(p.nu_mag) << '\n'
      << "gas_R = " << format_real(p.gas_R) << '\n'
      << "c_v = " << format_real(p.c_v) << '\n'
      << "kappa_a = " << format_real(p.kappa_a) << '\n'
      << "kappa_b = " << format_real(p.kappa_b) << '\n'
      << "q_exp = " << format_real(p.q_exp) << '\n';
  return out.str();
}

}  // namespace planar_mhd

#endif  // PLANAR_MHD_CONFIG_HPP
