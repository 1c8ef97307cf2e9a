#ifndef PLANAR_MHD_INITDATA_HPP
#define PLANAR_MHD_INITDATA_HPP

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "planar_mhd/core.hpp"
#include "planar_mhd/stencils.hpp"

namespace planar_mhd {

inline constexpr double kVacuumThreshold = 1e-12;

class LookupError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Initial profiles at cell centres. `delta` records the regularization
/// offset already added to rho0.
struct InitialData {
  std::vector<double> rho0;
  std::vector<double> u0;
  std::vector<Vec2> w0;
  std::vector<Vec2> b0;
  std::vector<double> theta0;
  double delta = 0.0;

  std::size_t size() const { return rho0.size(); }

  void validate() const {
    const std::size_t n = rho0.size();
    if (n == 0) throw DomainError("initial data: empty");
    if (u0.size() != n || w0.size() != n || b0.size() != n || theta0.size() != n) {
      throw DomainError("initial data: field arrays differ in length");
    }
    if (!(delta >= 0.0)) throw DomainError("initial data: negative delta");
    for (std::size_t i = 0; i < n; ++i) {
      if (!(rho0[i] >= delta)) throw DomainError("initial data: rho0 below delta at cell " + std::to_string(i));
      if (!(theta0[i] >= 0.0)) throw DomainError("initial data: negative theta0 at cell " + std::to_string(i));
    }
  }

  State to_state() const {
    validate();
    return State(0.0, rho0, u0, w0, b0, theta0);
  }
};

/// rho0 + delta pointwise; every other field untouched.
inline InitialData regularize(const InitialData& data, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("regularize: delta must be > 0");
  if (data.delta != 0.0) throw DomainError("regularize: data already regularized");
  InitialData out = data;
  for (double& r : out.rho0) r += delta;
  out.delta = delta;
  return out;
}

struct CompatibilityReport {
  double g1_norm = 0.0;
  double g2_norm = 0.0;
  double g3_norm = 0.0;
  double worst_vacuum_violation = 0.0;
  double tolerance = 0.0;
  bool passed = true;
};

/// Left-hand sides of the three compatibility relations evaluated with the
/// solver's own stencils, one entry per cell (the second one is a 2-vector).
struct CompatibilityNumerators {
  std::vector<double> momentum;
  std::vector<Vec2> transverse;
  std::vector<double> heat;
};

inline CompatibilityNumerators compatibility_numerators(const InitialData& data, const Grid& grid,
                                                        const PhysParams& params) {
  const std::size_t n = data.size();
  const double dx = grid.dx();
  CompatibilityNumerators out{std::vector<double>(n), std::vector<Vec2>(n), std::vector<double>(n)};

  std::vector<double> total_pressure(n);
  for (std::size_t i = 0; i < n; ++i) {
    total_pressure[i] = pressure(data.rho0[i], data.theta0[i], params) + 0.5 * norm2(data.b0[i]);
  }
  const auto u_xx = laplacian(data.u0, dx, Wall::Odd);
  const auto pi_x = cell_derivative(total_pressure, dx, Wall::Even);
  const auto dissipation_u = cell_gradient_squared(data.u0, dx, Wall::Odd);
  for (std::size_t i = 0; i < n; ++i) out.momentum[i] = params.lambda_visc * u_xx[i] - pi_x[i];

  std::vector<double> dissipation_wb(n, 0.0);
  for (std::size_t c = 0; c < 2; ++c) {
    const auto wc = component(data.w0, c);
    const auto bc = component(data.b0, c);
    const auto w_xx = laplacian(wc, dx, Wall::Odd);
    const auto b_x = cell_derivative(bc, dx, Wall::Odd);
    const auto dw = cell_gradient_squared(wc, dx, Wall::Odd);
    const auto db = cell_gradient_squared(bc, dx, Wall::Odd);
    for (std::size_t i = 0; i < n; ++i) {
      out.transverse[i][c] = params.mu_visc * w_xx[i] - b_x[i];
      dissipation_wb[i] += params.mu_visc * dw[i] + params.nu_mag * db[i];
    }
  }

  const auto kappa_face = kappa_faces(data.theta0, params);
  auto flux = face_gradient(data.theta0, dx, Wall::Even);
  for (std::size_t k = 0; k <= n; ++k) flux[k] *= kappa_face[k];
  const auto heat_div = face_divergence(flux, dx);
  for (std::size_t i = 0; i < n; ++i) {
    out.heat[i] = heat_div[i] + params.lambda_visc * dissipation_u[i] + dissipation_wb[i];
  }
  return out;
}

/// Data scale used for the relative vacuum tolerance: max(1, largest |field|).
inline double data_scale(const InitialData& data) {
  double s = 1.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    s = std::max({s, std::abs(data.rho0[i]), std::abs(data.u0[i]), std::abs(data.theta0[i]),
                  std::abs(data.w0[i][0]), std::abs(data.w0[i][1]), std::abs(data.b0[i][0]),
                  std::abs(data.b0[i][1])});
  }
  return s;
}

/// g-fields where rho0 > vacuum threshold, raw numerators on vacuum cells.
inline CompatibilityReport compatibility_residuals(const InitialData& data, const Grid& grid,
                                                   const PhysParams& params,
                                                   double relative_tolerance = 1e-8,
                                                   double vacuum_threshold = kVacuumThreshold) {
  const auto num = compatibility_numerators(data, grid, params);
  const std::size_t n = data.size();
  CompatibilityReport rep;
  rep.tolerance = relative_tolerance * data_scale(data);
  double s1 = 0.0, s2 = 0.0, s3 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double rho = data.rho0[i];
    if (rho > vacuum_threshold) {
      const double inv = 1.0 / std::sqrt(rho);
      const double g1 = num.momentum[i] * inv;
      const double g3 = num.heat[i] * inv;
      s1 += g1 * g1;
      s2 += norm2(num.transverse[i]) / rho;
      s3 += g3 * g3;
    } else {
      rep.worst_vacuum_violation =
          std::max({rep.worst_vacuum_violation, std::abs(num.momentum[i]), std::sqrt(norm2(num.transverse[i])),
                    std::abs(num.heat[i])});
    }
  }
  rep.g1_norm = std::sqrt(s1 * grid.dx());
  rep.g2_norm = std::sqrt(s2 * grid.dx());
  rep.g3_norm = std::sqrt(s3 * grid.dx());
  rep.passed = std::isfinite(rep.g1_norm) && std::isfinite(rep.g2_norm) && std::isfinite(rep.g3_norm) &&
               rep.worst_vacuum_violation <= rep.tolerance;
  return rep;
}

namespace detail {

inline InitialData blank(const Grid& grid) {
  const std::size_t n = grid.n_cells();
  InitialData d;
  d.rho0.assign(n, 1.0);
  d.u0.assign(n, 0.0);
  d.w0.assign(n, Vec2{0.0, 0.0});
  d.b0.assign(n, Vec2{0.0, 0.0});
  d.theta0.assign(n, 1.0);
  return d;
}

// Smooth compact bump with three vanishing derivatives at |x - c| = r.
inline double bump(double x, double center, double radius) {
  const double s = (x - center) / radius;
  if (std::abs(s) >= 1.0) return 0.0;
  const double c = std::cos(0.5 * std::numbers::pi * s);
  return c * c * c * c;
}

}  // namespace detail

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {"uniform-rest", "vacuum-pocket", "gaussian-density",
                                                 "magnetic-pulse", "smooth-shear"};
  return names;
}

/// Closed-form scenario library (see README for the formulas).
///
/// vacuum-pocket: rho0 = 0 on |x - 1/2| <= 0.05 and rises as
/// sin^20(pi d / (2 L)), d the distance from the pocket edge, L = 0.25, to 1.
/// The high-order contact keeps the discrete compatibility numerator on the
/// pocket below tolerance for n >= 128. Every other field is constant.
inline InitialData scenario(std::string_view name, const Grid& grid) {
  using std::numbers::pi;
  InitialData d = detail::blank(grid);
  const std::size_t n = grid.n_cells();
  if (name == "uniform-rest") return d;
  if (name == "vacuum-pocket") {
    constexpr double half_width = 0.05;
    constexpr double ramp = 0.25;
    for (std::size_t i = 0; i < n; ++i) {
      const double dist = std::abs(grid.center(i) - 0.5) - half_width;
      if (dist <= 0.0) {
        d.rho0[i] = 0.0;
      } else if (dist < ramp) {
        d.rho0[i] = std::pow(std::sin(0.5 * pi * dist / ramp), 20);
      }
    }
    return d;
  }
  if (name == "gaussian-density") {
    for (std::size_t i = 0; i < n; ++i) {
      const double y = (grid.center(i) - 0.5) / 0.1;
      d.rho0[i] = 1.0 + 0.5 * std::exp(-0.5 * y * y);
    }
    return d;
  }
  if (name == "magnetic-pulse") {
    for (std::size_t i = 0; i < n; ++i) d.b0[i][0] = 0.5 * detail::bump(grid.center(i), 0.5, 0.25);
    return d;
  }
  if (name == "smooth-shear") {
    for (std::size_t i = 0; i < n; ++i) {
      const double x = grid.center(i);
      d.u0[i] = 0.1 * std::sin(2.0 * pi * x);
      d.w0[i] = Vec2{0.5 * std::sin(pi * x), 0.25 * std::sin(2.0 * pi * x)};
      d.b0[i] = Vec2{0.2 * std::sin(pi * x), 0.0};
      d.theta0[i] = 1.0 + 0.1 * std::cos(pi * x);
    }
    return d;
  }
  throw LookupError("unknown scenario '" + std::string(name) + "'");
}

/// Reads an 8-column table (x, rho0, u0, w01, w02, b01, b02, theta0), one row
/// per cell in order; '#' lines and blank lines are skipped. The x column
/// must match the cell centres of the implied grid.
inline InitialData read_initial_table(std::istream& in) {
  InitialData d;
  std::vector<double> xs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream row(line);
    double v[8];
    for (double& x : v) {
      if (!(row >> x)) throw DomainError("initial table: line " + std::to_string(line_no) + " needs 8 numbers");
    }
    std::string extra;
    if (row >> extra) throw DomainError("initial table: line " + std::to_string(line_no) + " has extra columns");
    xs.push_back(v[0]);
    d.rho0.push_back(v[1]);
    d.u0.push_back(v[2]);
    d.w0.push_back(Vec2{v[3], v[4]});
    d.b0.push_back(Vec2{v[5], v[6]});
    d.theta0.push_back(v[7]);
  }
  if (xs.empty()) throw DomainError("initial table: no rows");
  const Grid grid(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (std::abs(xs[i] - grid.center(i)) > 1e-6 * grid.dx()) {
      throw DomainError("initial table: row " + std::to_string(i + 1) + " x does not match cell centre");
    }
  }
  d.validate();
  return d;
}

inline InitialData read_initial_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LookupError("cannot open initial table '" + path + "'");
  return read_initial_table(in);
}

}  // namespace planar_mhd

#endif  // PLANAR_MHD_INITDATA_HPP
