#ifndef PLANAR_MHD_CORE_HPP
#define PLANAR_MHD_CORE_HPP

// Domain types for the planar MHD model: physical constants, the uniform
// cell-centred mesh of (0,1), the five-field state snapshot, and the perfect
// gas closures P = R rho theta, e = C_V theta, kappa = a + b theta^q.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace planar_mhd {

using Vec2 = std::array<double, 2>;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline double norm2(const Vec2& v) { return v[0] * v[0] + v[1] * v[1]; }

/// Physical constants. Defaults are the normalized values (all ones, q = 1).
struct PhysParams {
  double lambda_visc = 1.0;
  double mu_visc = 1.0;
  double nu_mag = 1.0;
  double gas_R = 1.0;
  double c_v = 1.0;
  double kappa_a = 1.0;
  double kappa_b = 1.0;
  double q_exp = 1.0;

  /// Throws DomainError naming the first non-positive field.
  void validate() const {
    const std::pair<const char*, double> fields[] = {
        {"lambda_visc", lambda_visc}, {"mu_visc", mu_visc}, {"nu_mag", nu_mag},
        {"gas_R", gas_R},             {"c_v", c_v},         {"kappa_a", kappa_a},
        {"kappa_b", kappa_b},         {"q_exp", q_exp}};
    for (const auto& [name, value] : fields) {
      if (!(value > 0.0) || !std::isfinite(value)) {
        throw DomainError(std::string(name) + " must be > 0 and finite");
      }
    }
  }

  /// Constant C of the two-sided bound C^{-1}(1+theta^q) <= kappa <= C(1+theta^q).
  double kappa_bound_constant() const {
    return std::max({kappa_a, kappa_b, 1.0 / kappa_a, 1.0 / kappa_b});
  }

  bool operator==(const PhysParams&) const = default;
};

/// Uniform mesh of (0,1) with n_cells cells; values live at cell centres.
class Grid {
 public:
  explicit Grid(std::size_t n_cells) : n_(n_cells) {
    if (n_cells == 0) throw DomainError("grid needs at least one cell");
    dx_ = 1.0 / static_cast<double>(n_cells);
  }

  std::size_t n_cells() const { return n_; }
  double dx() const { return dx_; }
  double center(std::size_t i) const { return (static_cast<double>(i) + 0.5) * dx_; }

  std::vector<double> centers() const {
    std::vector<double> x(n_);
    for (std::size_t i = 0; i < n_; ++i) x[i] = center(i);
    return x;
  }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t n_;
  double dx_;
};

inline double pressure(double rho, double theta, const PhysParams& params) {
  if (rho < 0.0 || theta < 0.0) throw DomainError("pressure: negative density or temperature");
  return params.gas_R * rho * theta;
}

inline double kappa(double theta, const PhysParams& params) {
  if (theta < 0.0) throw DomainError("kappa: negative temperature");
  return params.kappa_a + params.kappa_b * std::pow(theta, params.q_exp);
}

inline double internal_energy(double theta, const PhysParams& params) {
  if (theta < 0.0) throw DomainError("internal_energy: negative temperature");
  return params.c_v * theta;
}

/// Snapshot of (rho, u, w, b, theta) at one time. Immutable once built; the
/// constructor rejects mismatched lengths and negative density or temperature.
/// Wall values of u, w, b are zero and theta_x vanishes at the walls through
/// the ghost-cell conventions in stencils.hpp, so no per-array check applies.
class State {
 public:
  State(double time, std::vector<double> rho, std::vector<double> u, std::vector<Vec2> w,
        std::vector<Vec2> b, std::vector<double> theta)
      : time_(time),
        rho_(std::move(rho)),
        u_(std::move(u)),
        w_(std::move(w)),
        b_(std::move(b)),
        theta_(std::move(theta)) {
    const std::size_t n = rho_.size();
    if (n == 0) throw DomainError("state: empty arrays");
    if (u_.size() != n || w_.size() != n || b_.size() != n || theta_.size() != n) {
      throw DomainError("state: field arrays differ in length");
    }
    if (!(time_ >= 0.0)) throw DomainError("state: negative time");
    for (std::size_t i = 0; i < n; ++i) {
      if (!(rho_[i] >= 0.0)) throw DomainError("state: negative density at cell " + std::to_string(i));
      if (!(theta_[i] >= 0.0)) {
        throw DomainError("state: negative temperature at cell " + std::to_string(i));
      }
    }
  }

  double time() const { return time_; }
  std::size_t size() const { return rho_.size(); }
  const std::vector<double>& rho() const { return rho_; }
  const std::vector<double>& u() const { return u_; }
  const std::vector<Vec2>& w() const { return w_; }
  const std::vector<Vec2>& b() const { return b_; }
  const std::vector<double>& theta() const { return theta_; }

  State with_time(double t) const {
    State copy = *this;
    if (!(t >= 0.0)) throw DomainError("state: negative time");
    copy.time_ = t;
    return copy;
  }

  bool operator==(const State&) const = default;

 private:
  double time_;
  std::vector<double> rho_;
  std::vector<double> u_;
  std::vector<Vec2> w_;
  std::vector<Vec2> b_;
  std::vector<double> theta_;
};

/// Uniform state with the given constants on every cell.
inline State uniform_state(const Grid& grid, double rho, double theta, double time = 0.0) {
  const std::size_t n = grid.n_cells();
  return State(time, std::vector<double>(n, rho), std::vector<double>(n, 0.0),
               std::vector<Vec2>(n, Vec2{0.0, 0.0}), std::vector<Vec2>(n, Vec2{0.0, 0.0}),
               std::vector<double>(n, theta));
}

}  // namespace planar_mhd

#endif  // PLANAR_MHD_CORE_HPP
