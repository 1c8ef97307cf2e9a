#ifndef PLANAR_MHD_DIAGNOSTICS_HPP
#define PLANAR_MHD_DIAGNOSTICS_HPP

// Functionals tracked along a run: mass, total energy, the entropy functional
// int(rho ln rho + rho |ln theta|), the entropy production and dissipation
// integrals, the theta^-alpha weighted dissipation, the effective potential
// phi with phi_x = rho u, phi_t = lambda u_x - rho u^2 - P - |b|^2/2, the
// rho e^phi monitor, and the discrete Sobolev quantities.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "planar_mhd/core.hpp"
#include "planar_mhd/stencils.hpp"

namespace planar_mhd {

/// Divisor floor for theta in the dissipation functionals.
inline constexpr double kThetaDivisorFloor = 1e-30;

struct DiagnosticsRecord {
  double time = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double entropy_fn = 0.0;
  double entropy_prod_cum = 0.0;
  double diss_visc = 0.0;
  double diss_shear = 0.0;
  double diss_mag = 0.0;
  double diss_heat = 0.0;
  double weighted_diss = 0.0;
  double max_rho = 0.0;
  double min_theta = 0.0;
  double max_theta = 0.0;
  double rho_F_max = 0.0;
  std::map<std::string, double> norms;
};

struct Dissipation {
  double visc = 0.0;
  double shear = 0.0;
  double mag = 0.0;
  double heat = 0.0;
};

inline double mass(const State& s, const Grid& grid) { return integrate(s.rho(), grid.dx()); }

inline double total_energy(const State& s, const Grid& grid, const PhysParams& params) {
  double sum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double kinetic = 0.5 * (s.u()[i] * s.u()[i] + norm2(s.w()[i]));
    sum += s.rho()[i] * (params.c_v * s.theta()[i] + kinetic) + 0.5 * norm2(s.b()[i]);
  }
  return sum * grid.dx();
}

/// +infinity when a cell carries mass at zero temperature.
inline double entropy_functional(const State& s, const Grid& grid) {
  double sum = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double rho = s.rho()[i];
    if (rho <= 0.0) continue;
    const double theta = s.theta()[i];
    if (theta <= 0.0) return std::numeric_limits<double>::infinity();
    sum += rho * std::log(rho) + rho * std::abs(std::log(theta));
  }
  return sum * grid.dx();
}

namespace detail {

struct GradientTerms {
  std::vector<double> visc;   // lambda u_x^2
  std::vector<double> shear;  // mu |w_x|^2
  std::vector<double> mag;    // nu |b_x|^2
  std::vector<double> theta_x_sq;
  std::vector<double> kappa_theta_x_sq;
};

inline GradientTerms gradient_terms(const State& s, const Grid& grid, const PhysParams& params) {
  const double dx = grid.dx();
  const std::size_t n = s.size();
  GradientTerms t;
  t.visc = cell_gradient_squared(s.u(), dx, Wall::Odd);
  for (double& v : t.visc) v *= params.lambda_visc;
  t.shear.assign(n, 0.0);
  t.mag.assign(n, 0.0);
  for (std::size_t c = 0; c < 2; ++c) {
    const auto dw = cell_gradient_squared(component(s.w(), c), dx, Wall::Odd);
    const auto db = cell_gradient_squared(component(s.b(), c), dx, Wall::Odd);
    for (std::size_t i = 0; i < n; ++i) {
      t.shear[i] += params.mu_visc * dw[i];
      t.mag[i] += params.nu_mag * db[i];
    }
  }
  const auto g = face_gradient(s.theta(), dx, Wall::Even);
  const auto kf = kappa_faces(s.theta(), params);
  t.theta_x_sq.resize(n);
  t.kappa_theta_x_sq.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    t.theta_x_sq[i] = 0.5 * (g[i] * g[i] + g[i + 1] * g[i + 1]);
    t.kappa_theta_x_sq[i] = 0.5 * (kf[i] * g[i] * g[i] + kf[i + 1] * g[i + 1] * g[i + 1]);
  }
  return t;
}

inline double floored(double theta) { return std::max(theta, kThetaDivisorFloor); }

}  // namespace detail

/// dt-weighted dissipation integrals on the post-step state.
inline Dissipation dissipation_increment(const State& /*before*/, const State& after, double dt,
                                         const Grid& grid, const PhysParams& params) {
  const auto t = detail::gradient_terms(after, grid, params);
  Dissipation d;
  for (std::size_t i = 0; i < after.size(); ++i) {
    d.visc += t.visc[i];
    d.shear += t.shear[i];
    d.mag += t.mag[i];
    if (after.theta()[i] > 0.0) {
      const double th = detail::floored(after.theta()[i]);
      d.heat += t.kappa_theta_x_sq[i] / (th * th);
    }
  }
  const double w = dt * grid.dx();
  d.visc *= w;
  d.shear *= w;
  d.mag *= w;
  d.heat *= w;
  return d;
}

/// dt-weighted right side of the entropy balance:
/// (lambda u_x^2 + mu |w_x|^2 + nu |b_x|^2) / theta + kappa theta_x^2 / theta^2.
inline double entropy_production_increment(const State& after, double dt, const Grid& grid,
                                           const PhysParams& params) {
  const auto t = detail::gradient_terms(after, grid, params);
  double sum = 0.0;
  for (std::size_t i = 0; i < after.size(); ++i) {
    const double th = detail::floored(after.theta()[i]);
    sum += (t.visc[i] + t.shear[i] + t.mag[i]) / th + t.kappa_theta_x_sq[i] / (th * th);
  }
  return sum * dt * grid.dx();
}

inline bool alpha_admissible(double alpha, const PhysParams& params) {
  return alpha > 0.0 && alpha < std::min(1.0, params.q_exp);
}

inline double default_alpha(const PhysParams& params) { return 0.5 * std::min(1.0, params.q_exp); }

/// dt-weighted (dissipation)/theta^alpha + (1 + theta^q) theta_x^2 / theta^(1+alpha).
inline double weighted_dissipation_increment(const State& /*before*/, const State& after, double dt,
                                             const Grid& grid, const PhysParams& params, double alpha) {
  if (!alpha_admissible(alpha, params)) {
    throw DomainError("weighted dissipation: alpha must lie in (0, min(1, q_exp))");
  }
  const auto t = detail::gradient_terms(after, grid, params);
  double sum = 0.0;
  for (std::size_t i = 0; i < after.size(); ++i) {
    const double th = detail::floored(after.theta()[i]);
    const double conduct = 1.0 + std::pow(th, params.q_exp);
    sum += (t.visc[i] + t.shear[i] + t.mag[i]) / std::pow(th, alpha) +
           conduct * t.theta_x_sq[i] / std::pow(th, 1.0 + alpha);
  }
  return sum * dt * grid.dx();
}

struct PhiField {
  std::vector<double> phi;
  double time = 0.0;
};

struct PhiUpdate {
  PhiField field;
  double residual = 0.0;  // || D_x phi - rho u ||_L2 at interior faces
};

/// phi(x, t0) = int_0^x rho u, midpoint rule at cell centres.
inline PhiField initial_phi(const State& s, const Grid& grid) {
  PhiField f{std::vector<double>(s.size()), s.time()};
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double m = s.rho()[i] * s.u()[i] * grid.dx();
    f.phi[i] = acc + 0.5 * m;
    acc += m;
  }
  return f;
}

/// Effective viscous flux lambda u_x - rho u^2 - P - |b|^2 / 2 per cell.
inline std::vector<double> effective_flux(const State& s, const Grid& grid, const PhysParams& params) {
  const auto ux = cell_derivative(s.u(), grid.dx(), Wall::Odd);
  std::vector<double> p(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double rho = s.rho()[i];
    const double u = s.u()[i];
    p[i] = params.lambda_visc * ux[i] - rho * u * u - pressure(rho, s.theta()[i], params) - 0.5 * norm2(s.b()[i]);
  }
  return p;
}

inline double phi_residual(const PhiField& phi, const State& s, const Grid& grid) {
  const std::size_t n = s.size();
  if (n < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    const double dphi = (phi.phi[k] - phi.phi[k - 1]) / grid.dx();
    const double m = 0.5 * (s.rho()[k - 1] * s.u()[k - 1] + s.rho()[k] * s.u()[k]);
    sum += (dphi - m) * (dphi - m);
  }
  return std::sqrt(sum * grid.dx());
}

/// Explicit first-order update phi += dt * effective_flux(before).
inline PhiUpdate update_phi(const PhiField& phi, const State& before, const State& after, double dt,
                            const Grid& grid, const PhysParams& params) {
  if (std::abs(phi.time - before.time()) > 1e-12 * std::max(1.0, std::abs(phi.time))) {
    throw DomainError("update_phi: phi is not synchronized with the state");
  }
  const auto flux = effective_flux(before, grid, params);
  PhiUpdate out{PhiField{phi.phi, after.time()}, 0.0};
  for (std::size_t i = 0; i < flux.size(); ++i) out.field.phi[i] += dt * flux[i];
  out.residual = phi_residual(out.field, after, grid);
  return out;
}

/// max_i rho_i exp(phi_i); +infinity when the exponential overflows.
inline double density_bound_monitor(const PhiField& phi, const State& s) {
  double m = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double v = s.rho()[i] * std::exp(phi.phi[i]);
    if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
    m = std::max(m, v);
  }
  return m;
}

/// Squared discrete norms of the quantities bounded in the a priori
/// estimates. Spatial derivatives use the solver's face stencils (with the
/// wall ghosts); rho has no boundary condition so its first difference runs
/// over interior faces and its second difference is one-sided at the ends.
/// Time derivatives are (after - before) / dt; the sqrt(rho) weighted ones
/// use the post-step density.
inline std::map<std::string, double> norm_suite(const State& before, const State& after, double dt,
                                                const Grid& grid, const PhysParams& params) {
  const double dx = grid.dx();
  const std::size_t n = after.size();
  std::map<std::string, double> out;
  auto sum_dx = [dx](const std::vector<double>& v) { return integrate(v, dx); };
  auto sq = [](std::vector<double> v) {
    for (double& x : v) x *= x;
    return v;
  };
  const double inv_dt = dt > 0.0 ? 1.0 / dt : 0.0;

  std::vector<double> u_t(n), theta_t(n), rho_t(n);
  for (std::size_t i = 0; i < n; ++i) {
    u_t[i] = (after.u()[i] - before.u()[i]) * inv_dt;
    theta_t[i] = (after.theta()[i] - before.theta()[i]) * inv_dt;
    rho_t[i] = (after.rho()[i] - before.rho()[i]) * inv_dt;
  }

  // scalar velocity
  out["u_l2sq"] = sum_dx(sq(after.u()));
  out["u_x_l2sq"] = sum_dx(cell_gradient_squared(after.u(), dx, Wall::Odd));
  out["u_xx_l2sq"] = sum_dx(sq(laplacian(after.u(), dx, Wall::Odd)));
  out["u_xt_l2sq"] = sum_dx(cell_gradient_squared(u_t, dx, Wall::Odd));

  double w_l2 = 0, w_x = 0, w_xx = 0, w_xt = 0, b_l2 = 0, b_x = 0, b_xx = 0, b_xt = 0, rho_wt = 0, b_t = 0;
  for (std::size_t c = 0; c < 2; ++c) {
    const auto wc = component(after.w(), c);
    const auto bc = component(after.b(), c);
    std::vector<double> wt(n), bt(n), rwt(n);
    for (std::size_t i = 0; i < n; ++i) {
      wt[i] = (after.w()[i][c] - before.w()[i][c]) * inv_dt;
      bt[i] = (after.b()[i][c] - before.b()[i][c]) * inv_dt;
      rwt[i] = after.rho()[i] * wt[i] * wt[i];
    }
    w_l2 += sum_dx(sq(wc));
    w_x += sum_dx(cell_gradient_squared(wc, dx, Wall::Odd));
    w_xx += sum_dx(sq(laplacian(wc, dx, Wall::Odd)));
    w_xt += sum_dx(cell_gradient_squared(wt, dx, Wall::Odd));
    b_l2 += sum_dx(sq(bc));
    b_x += sum_dx(cell_gradient_squared(bc, dx, Wall::Odd));
    b_xx += sum_dx(sq(laplacian(bc, dx, Wall::Odd)));
    b_xt += sum_dx(cell_gradient_squared(bt, dx, Wall::Odd));
    b_t += sum_dx(sq(bt));
    rho_wt += sum_dx(rwt);
  }
  out["w_l2sq"] = w_l2;
  out["w_x_l2sq"] = w_x;
  out["w_xx_l2sq"] = w_xx;
  out["w_xt_l2sq"] = w_xt;
  out["b_l2sq"] = b_l2;
  out["b_x_l2sq"] = b_x;
  out["b_xx_l2sq"] = b_xx;
  out["b_xt_l2sq"] = b_xt;
  out["b_t_l2sq"] = b_t;
  out["sqrt_rho_w_t_l2sq"] = rho_wt;

  std::vector<double> rho_ut(n), rho_thetat(n), p2(n), rho_theta_q2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double rho = after.rho()[i];
    const double th = after.theta()[i];
    rho_ut[i] = rho * u_t[i] * u_t[i];
    rho_thetat[i] = rho * theta_t[i] * theta_t[i];
    const double p = pressure(rho, th, params);
    p2[i] = p * p;
    rho_theta_q2[i] = rho * std::pow(th, params.q_exp + 2.0);
  }
  out["sqrt_rho_u_t_l2sq"] = sum_dx(rho_ut);
  out["sqrt_rho_theta_t_l2sq"] = sum_dx(rho_thetat);
  out["p_l2sq"] = sum_dx(p2);
  out["rho_theta_q2_int"] = sum_dx(rho_theta_q2);

  double rho_x = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    const double g = (after.rho()[k] - after.rho()[k - 1]) / dx;
    rho_x += g * g * dx;
  }
  out["rho_x_l2sq"] = rho_x;
  out["rho_t_l2sq"] = sum_dx(sq(rho_t));

  const auto g = face_gradient(after.theta(), dx, Wall::Even);
  const auto kf = kappa_faces(after.theta(), params);
  double theta_x = 0.0, kappa_theta_x = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double w = (k == 0 || k == n) ? 0.5 : 1.0;
    theta_x += w * g[k] * g[k] * dx;
    kappa_theta_x += w * kf[k] * kf[k] * g[k] * g[k] * dx;
  }
  out["theta_x_l2sq"] = theta_x;
  out["kappa_theta_x_l2sq"] = kappa_theta_x;
  out["theta_xx_l2sq"] = sum_dx(sq(laplacian(after.theta(), dx, Wall::Even)));
  out["rho_xx_l2sq"] = sum_dx(sq(second_difference_free(after.rho(), dx)));
  return out;
}

/// Accumulates the cumulative functionals step by step and produces records.
class DiagnosticsTracker {
 public:
  DiagnosticsTracker(const Grid& grid, const PhysParams& params, double alpha, const State& initial)
      : grid_(grid), params_(params), alpha_(alpha), phi_(initial_phi(initial, grid)) {
    if (!alpha_admissible(alpha, params)) {
      throw DomainError("diagnostics: alpha must lie in (0, min(1, q_exp))");
    }
    record_ = snapshot(initial, initial, 0.0);
  }

  void advance(const State& before, const State& after, double dt) {
    const auto d = dissipation_increment(before, after, dt, grid_, params_);
    diss_.visc += d.visc;
    diss_.shear += d.shear;
    diss_.mag += d.mag;
    diss_.heat += d.heat;
    entropy_prod_ += entropy_production_increment(after, dt, grid_, params_);
    weighted_ += weighted_dissipation_increment(before, after, dt, grid_, params_, alpha_);
    const double sup = *std::max_element(after.theta().begin(), after.theta().end());
    theta_sup_pow_ += dt * std::pow(sup, params_.q_exp - alpha_ + 1.0);
    for (double th : after.theta()) {
      if (th < kThetaDivisorFloor) ++floor_hits_;
    }
    auto upd = update_phi(phi_, before, after, dt, grid_, params_);
    phi_ = std::move(upd.field);
    phi_residual_ = upd.residual;
    record_ = snapshot(before, after, dt);
  }

  const DiagnosticsRecord& record() const { return record_; }
  const PhiField& phi() const { return phi_; }
  double alpha() const { return alpha_; }

 private:
  DiagnosticsRecord snapshot(const State& before, const State& after, double dt) const {
    DiagnosticsRecord r;
    r.time = after.time();
    r.mass = mass(after, grid_);
    r.energy = total_energy(after, grid_, params_);
    r.entropy_fn = entropy_functional(after, grid_);
    r.entropy_prod_cum = entropy_prod_;
    r.diss_visc = diss_.visc;
    r.diss_shear = diss_.shear;
    r.diss_mag = diss_.mag;
    r.diss_heat = diss_.heat;
    r.weighted_diss = weighted_;
    r.max_rho = *std::max_element(after.rho().begin(), after.rho().end());
    r.min_theta = *std::min_element(after.theta().begin(), after.theta().end());
    r.max_theta = *std::max_element(after.theta().begin(), after.theta().end());
    r.rho_F_max = density_bound_monitor(phi_, after);
    r.norms = norm_suite(before, after, dt, grid_, params_);
    r.norms["min_rho"] = *std::min_element(after.rho().begin(), after.rho().end());
    r.norms["phi_residual"] = phi_residual_;
    r.norms["theta_floor_hits"] = static_cast<double>(floor_hits_);
    r.norms["theta_sup_pow_int"] = theta_sup_pow_;
    return r;
  }

  Grid grid_;
  PhysParams params_;
  double alpha_;
  PhiField phi_;
  Dissipation diss_;
  double entropy_prod_ = 0.0;
  double weighted_ = 0.0;
  double theta_sup_pow_ = 0.0;
  double phi_residual_ = 0.0;
  std::size_t floor_hits_ = 0;
  DiagnosticsRecord record_;
};

/// Running verdicts over a stream of records from one run.
struct RunMonitor {
  std::size_t count = 0;
  double mass0 = 0.0;
  double energy0 = 0.0;
  double max_mass_drift = 0.0;
  double last_energy_rel_drift = 0.0;
  double max_entropy_fn = -std::numeric_limits<double>::infinity();
  double last_entropy_prod = 0.0;
  bool entropy_prod_monotone = true;
  /// Largest rise of rho_F_max above its running minimum, relative to it.
  double rho_F_max_rise = 0.0;
  double rho_F_running_min = std::numeric_limits<double>::infinity();
  double min_rho = std::numeric_limits<double>::infinity();
  double min_theta = std::numeric_limits<double>::infinity();

  void observe(const DiagnosticsRecord& r) {
    if (count == 0) {
      mass0 = r.mass;
      energy0 = r.energy;
    }
    ++count;
    max_mass_drift = std::max(max_mass_drift, std::abs(r.mass - mass0));
    last_energy_rel_drift = energy0 != 0.0 ? (r.energy - energy0) / energy0 : r.energy;
    max_entropy_fn = std::max(max_entropy_fn, r.entropy_fn);
    if (count > 1 && r.entropy_prod_cum < last_entropy_prod) entropy_prod_monotone = false;
    last_entropy_prod = r.entropy_prod_cum;
    if (std::isfinite(r.rho_F_max) && r.rho_F_max > 0.0) {
      if (r.rho_F_max > rho_F_running_min) {
        rho_F_max_rise = std::max(rho_F_max_rise, (r.rho_F_max - rho_F_running_min) / rho_F_running_min);
      }
      rho_F_running_min = std::min(rho_F_running_min, r.rho_F_max);
    } else if (!std::isfinite(r.rho_F_max)) {
      rho_F_max_rise = std::numeric_limits<double>::infinity();
    }
    min_theta = std::min(min_theta, r.min_theta);
    const auto it = r.norms.find("min_rho");
    if (it != r.norms.end()) min_rho = std::min(min_rho, it->second);
  }
};

}  // namespace planar_mhd

#endif  // PLANAR_MHD_DIAGNOSTICS_HPP
