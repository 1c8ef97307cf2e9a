#ifndef PLANAR_MHD_SOLVER_HPP
#define PLANAR_MHD_SOLVER_HPP

// Semi-implicit operator-split time stepping for the planar MHD system
//
//   rho_t + (rho u)_x = 0
//   (rho u)_t + (rho u^2 + P + |b|^2/2)_x = (lambda u_x)_x
//   (rho w)_t + (rho u w - b)_x = (mu w_x)_x
//   b_t + (u b - w)_x = (nu b_x)_x
//   (rho e)_t + (rho u e)_x - (kappa(theta) theta_x)_x
//       = lambda u_x^2 + mu |w_x|^2 + nu |b_x|^2 - P u_x
//
// on (0,1) with u = w = b = theta_x = 0 at the walls.
//
// One step:
//   1. rho: upwind flux difference with face velocity (u_i + u_{i+1})/2,
//      zero flux through the walls.
//   2. rho u: the same mass flux carries the donor-cell velocity; central
//      gradient of P(rho^{n+1}, theta^n) + |b^n|^2/2; backward Euler viscosity.
//   3. rho w: upwind convection, central b^n_x source, backward Euler.
//   4. b: central (u^n b^n - w^n)_x, backward Euler resistivity.
//   5. rho e: upwind convection of theta^n, heating from the new gradients,
//      -P u_x implicit where u_x > 0 and explicit where u_x < 0, conduction
//      by Picard iteration on frozen face conductivities.
// Every implicit stage solves for the primitive variable with a density
// weight, so vacuum cells receive the value of the degenerate elliptic
// balance instead of a division by rho.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "planar_mhd/core.hpp"
#include "planar_mhd/diagnostics.hpp"
#include "planar_mhd/initdata.hpp"
#include "planar_mhd/stencils.hpp"

namespace planar_mhd {

struct SchemeConfig {
  double cfl = 0.5;
  double picard_tol = 1e-10;
  int picard_max_iters = 50;
  double dt_max = 1.0;
  double theta_floor_tol = 1e-10;

  void validate() const {
    if (!(cfl > 0.0 && cfl <= 1.0)) throw DomainError("cfl must lie in (0, 1]");
    if (!(picard_tol > 0.0)) throw DomainError("picard_tol must be > 0");
    if (picard_max_iters < 1) throw DomainError("picard_max_iters must be >= 1");
    if (!(dt_max > 0.0)) throw DomainError("dt_max must be > 0");
    if (!(theta_floor_tol >= 0.0)) throw DomainError("theta_floor_tol must be >= 0");
  }
};

struct StepReport {
  double dt_used = 0.0;
  int picard_iters = 0;
  double max_div_residual = 0.0;
  std::size_t clipped_cells = 0;
};

class SolverError : public std::runtime_error {
 public:
  enum class Kind { Singular, Positivity, Iteration };

  SolverError(Kind kind, const std::string& what, double residual = 0.0)
      : std::runtime_error(what), kind_(kind), residual_(residual) {}

  Kind kind() const { return kind_; }
  double residual() const { return residual_; }

 private:
  Kind kind_;
  double residual_;
};

/// Source terms added to the right side of each equation (manufactured
/// solutions). Evaluated at cell centres.
struct ForcingValues {
  double rho = 0.0;
  double momentum = 0.0;
  Vec2 transverse{0.0, 0.0};
  Vec2 induction{0.0, 0.0};
  double energy = 0.0;
};

using Forcing = std::function<ForcingValues(double x, double t)>;

/// min(dt_max, cfl dx / max_i(|u_i| + sqrt(R theta_i))); a field at rest with
/// zero temperature falls back to min(dt_max, cfl dx).
inline double stable_dt(const State& s, const Grid& grid, const PhysParams& params, const SchemeConfig& cfg) {
  double speed = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    speed = std::max(speed, std::abs(s.u()[i]) + std::sqrt(params.gas_R * s.theta()[i]));
  }
  if (!(speed > 0.0)) return std::min(cfg.dt_max, cfg.cfl * grid.dx());
  return std::min(cfg.dt_max, cfg.cfl * grid.dx() / speed);
}

namespace stages {

/// Upwind mass flux at the n+1 faces together with the donor cell of each.
struct MassFlux {
  std::vector<double> flux;
  std::vector<std::size_t> donor;
};

inline MassFlux mass_flux(std::span<const double> rho, std::span<const double> u) {
  const std::size_t n = rho.size();
  const auto uf = face_average(u, Wall::Odd);
  MassFlux m{std::vector<double>(n + 1, 0.0), std::vector<std::size_t>(n + 1, 0)};
  for (std::size_t k = 1; k < n; ++k) {
    m.donor[k] = uf[k] >= 0.0 ? k - 1 : k;
    m.flux[k] = uf[k] * rho[m.donor[k]];
  }
  m.donor[n] = n - 1;
  return m;
}

/// q_i - dt/dx (F_{i+1} q_donor - F_i q_donor) for a per-unit-mass quantity q.
inline std::vector<double> convect(std::span<const double> density_q, const MassFlux& m,
                                   std::span<const double> q, double dt, double dx) {
  const std::size_t n = density_q.size();
  std::vector<double> flux(n + 1);
  for (std::size_t k = 0; k <= n; ++k) flux[k] = m.flux[k] * q[m.donor[k]];
  std::vector<double> out(n);
  const double r = dt / dx;
  for (std::size_t i = 0; i < n; ++i) out[i] = density_q[i] - r * (flux[i + 1] - flux[i]);
  return out;
}

/// Stage 1 on its own: first-order upwind continuity update.
inline std::vector<double> continuity_update(std::span<const double> rho, std::span<const double> u,
                                             double dt, double dx) {
  const auto m = mass_flux(rho, u);
  std::vector<double> one(rho.size(), 1.0);
  return convect(rho, m, one, dt, dx);
}

}  // namespace stages

/// Discrete residuals of the magnetic-energy balance
///   (|b|^2/2)_t + b.(u b - w)_x = nu (b.b_x)_x - nu |b_x|^2
/// and of the pressure form of the energy equation
///   (C_V/R)(P_t + (u P)_x) - (kappa theta_x)_x = lambda u_x^2 + mu|w_x|^2 + nu|b_x|^2 - P u_x,
/// time differences over the step, spatial terms on the later state.
inline std::pair<double, double> consistency_residuals(const State& before, const State& after, double dt,
                                                       const Grid& grid, const PhysParams& params) {
  const double dx = grid.dx();
  const std::size_t n = after.size();
  std::vector<double> r_mag(n, 0.0), r_p(n, 0.0);

  std::vector<double> half_b2(n), half_b2_old(n);
  for (std::size_t i = 0; i < n; ++i) {
    half_b2[i] = 0.5 * norm2(after.b()[i]);
    half_b2_old[i] = 0.5 * norm2(before.b()[i]);
  }
  const auto lap_half_b2 = laplacian(half_b2, dx, Wall::Even);
  for (std::size_t c = 0; c < 2; ++c) {
    std::vector<double> flux(n);
    const auto bc = component(after.b(), c);
    for (std::size_t i = 0; i < n; ++i) flux[i] = after.u()[i] * bc[i] - after.w()[i][c];
    const auto dflux = cell_derivative(flux, dx, Wall::Odd);
    const auto bx2 = cell_gradient_squared(bc, dx, Wall::Odd);
    for (std::size_t i = 0; i < n; ++i) r_mag[i] += bc[i] * dflux[i] + params.nu_mag * bx2[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    r_mag[i] += (half_b2[i] - half_b2_old[i]) / dt - params.nu_mag * lap_half_b2[i];
  }

  std::vector<double> p(n), p_old(n), up(n);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = pressure(after.rho()[i], after.theta()[i], params);
    p_old[i] = pressure(before.rho()[i], before.theta()[i], params);
    up[i] = after.u()[i] * p[i];
  }
  const auto dup = cell_derivative(up, dx, Wall::Odd);
  const auto ux = cell_derivative(after.u(), dx, Wall::Odd);
  auto heat_flux = face_gradient(after.theta(), dx, Wall::Even);
  const auto kf = kappa_faces(after.theta(), params);
  for (std::size_t k = 0; k <= n; ++k) heat_flux[k] *= kf[k];
  const auto heat_div = face_divergence(heat_flux, dx);
  const auto g = detail::gradient_terms(after, grid, params);
  const double ratio = params.c_v / params.gas_R;
  for (std::size_t i = 0; i < n; ++i) {
    r_p[i] = ratio * ((p[i] - p_old[i]) / dt + dup[i]) - heat_div[i] - (g.visc[i] + g.shear[i] + g.mag[i]) +
             p[i] * ux[i];
  }
  return {l2_norm(r_mag, dx), l2_norm(r_p, dx)};
}

struct StepOptions {
  const Forcing* forcing = nullptr;
  bool compute_residuals = true;
};

/// Advances one step of size dt. Throws SolverError on a singular system, a
/// temperature undershoot beyond theta_floor_tol, or Picard non-convergence.
inline std::pair<State, StepReport> step(const State& s, double dt, const Grid& grid, const PhysParams& params,
                                         const SchemeConfig& cfg, const StepOptions& opts = {}) {
  if (!(dt > 0.0)) throw DomainError("step: dt must be > 0");
  const std::size_t n = s.size();
  if (n != grid.n_cells()) throw DomainError("step: state and grid sizes differ");
  const double dx = grid.dx();
  const double t_old = s.time();
  const double t_new = t_old + dt;
  const auto& rho = s.rho();
  const auto& u = s.u();
  const auto& theta = s.theta();
  StepReport report;
  report.dt_used = dt;

  auto force = [&](double t) {
    std::vector<ForcingValues> f(n);
    if (opts.forcing != nullptr) {
      for (std::size_t i = 0; i < n; ++i) f[i] = (*opts.forcing)(grid.center(i), t);
    }
    return f;
  };
  const auto f_old = force(t_old);
  const auto f_new = opts.forcing != nullptr ? force(t_new) : f_old;

  auto solve = [](const Tridiagonal& m, const std::vector<double>& rhs, const char* stage) {
    try {
      return solve_tridiagonal(m, rhs);
    } catch (const SingularSystem& e) {
      throw SolverError(SolverError::Kind::Singular, std::string(stage) + ": " + e.what());
    }
  };

  // Stage 1: continuity.
  const auto mflux = stages::mass_flux(rho, u);
  std::vector<double> ones(n, 1.0);
  auto rho_new = stages::convect(rho, mflux, ones, dt, dx);
  double rho_scale = 0.0;
  for (double r : rho) rho_scale = std::max(rho_scale, r);
  for (std::size_t i = 0; i < n; ++i) {
    rho_new[i] += dt * f_old[i].rho;
    if (rho_new[i] < 0.0) {
      if (rho_new[i] >= -1e-14 * rho_scale) {
        rho_new[i] = 0.0;
      } else {
        std::ostringstream msg;
        msg << "negative density " << rho_new[i] << " at cell " << i;
        throw SolverError(SolverError::Kind::Positivity, msg.str(), rho_new[i]);
      }
    }
  }

  // Stage 2: longitudinal momentum.
  std::vector<double> momentum(n), total_p(n);
  for (std::size_t i = 0; i < n; ++i) {
    momentum[i] = rho[i] * u[i];
    total_p[i] = params.gas_R * rho_new[i] * theta[i] + 0.5 * norm2(s.b()[i]);
  }
  auto rhs_u = stages::convect(momentum, mflux, u, dt, dx);
  {
    const auto pf = face_average(total_p, Wall::Even);
    for (std::size_t i = 0; i < n; ++i) rhs_u[i] += -dt / dx * (pf[i + 1] - pf[i]) + dt * f_new[i].momentum;
  }
  const std::vector<double> lambda_f(n + 1, params.lambda_visc);
  const auto u_new = solve(implicit_diffusion(rho_new, lambda_f, dt, dx, Wall::Odd), rhs_u, "momentum");

  // Stage 3: transverse momentum.
  std::vector<Vec2> w_new(n);
  const std::vector<double> mu_f(n + 1, params.mu_visc);
  const auto m_w = implicit_diffusion(rho_new, mu_f, dt, dx, Wall::Odd);
  for (std::size_t c = 0; c < 2; ++c) {
    const auto wc = component(s.w(), c);
    std::vector<double> rw(n);
    for (std::size_t i = 0; i < n; ++i) rw[i] = rho[i] * wc[i];
    auto rhs = stages::convect(rw, mflux, wc, dt, dx);
    const auto bf = face_average(component(s.b(), c), Wall::Odd);
    for (std::size_t i = 0; i < n; ++i) rhs[i] += dt / dx * (bf[i + 1] - bf[i]) + dt * f_new[i].transverse[c];
    const auto sol = solve(m_w, rhs, "transverse momentum");
    for (std::size_t i = 0; i < n; ++i) w_new[i][c] = sol[i];
  }

  // Stage 4: induction.
  std::vector<Vec2> b_new(n);
  const std::vector<double> nu_f(n + 1, params.nu_mag);
  const auto m_b = implicit_diffusion(ones, nu_f, dt, dx, Wall::Odd);
  for (std::size_t c = 0; c < 2; ++c) {
    std::vector<double> flux(n), rhs(n);
    for (std::size_t i = 0; i < n; ++i) flux[i] = u[i] * s.b()[i][c] - s.w()[i][c];
    const auto ff = face_average(flux, Wall::Odd);
    for (std::size_t i = 0; i < n; ++i) {
      rhs[i] = s.b()[i][c] - dt / dx * (ff[i + 1] - ff[i]) + dt * f_new[i].induction[c];
    }
    const auto sol = solve(m_b, rhs, "induction");
    for (std::size_t i = 0; i < n; ++i) b_new[i][c] = sol[i];
  }

  // Stage 5: internal energy with nonlinear conduction.
  const auto ux = cell_derivative(u_new, dx, Wall::Odd);
  std::vector<double> heating = cell_gradient_squared(u_new, dx, Wall::Odd);
  for (double& h : heating) h *= params.lambda_visc;
  for (std::size_t c = 0; c < 2; ++c) {
    const auto dw = cell_gradient_squared(component(w_new, c), dx, Wall::Odd);
    const auto db = cell_gradient_squared(component(b_new, c), dx, Wall::Odd);
    for (std::size_t i = 0; i < n; ++i) heating[i] += params.mu_visc * dw[i] + params.nu_mag * db[i];
  }
  std::vector<double> rho_theta(n);
  for (std::size_t i = 0; i < n; ++i) rho_theta[i] = rho[i] * theta[i];
  const auto convected = stages::convect(rho_theta, mflux, theta, dt, dx);
  std::vector<double> source(n), weight(n), compress_rate(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double compression = std::max(-ux[i], 0.0) * params.gas_R * rho_new[i] * theta[i];
    source[i] = dt * (heating[i] + compression + f_new[i].energy);
    compress_rate[i] = dt * params.gas_R * rho_new[i] * std::max(ux[i], 0.0);
    weight[i] = params.c_v * rho_new[i] + compress_rate[i];
  }

  // Picard on frozen face conductivities, written as defect correction
  // A(theta_k) d = rhs - A(theta_k) theta_k so that a balanced state gives an
  // exactly zero update.
  std::vector<double> theta_new(theta.begin(), theta.end());
  double change = std::numeric_limits<double>::infinity();
  int iters = 0;
  while (true) {
    const auto kf = kappa_faces(theta_new, params);
    auto flux = face_gradient(theta_new, dx, Wall::Even);
    for (std::size_t k = 0; k <= n; ++k) flux[k] *= kf[k];
    std::vector<double> defect(n);
    for (std::size_t i = 0; i < n; ++i) {
      defect[i] = params.c_v * (convected[i] - rho_new[i] * theta_new[i]) - compress_rate[i] * theta_new[i] +
                  source[i] + dt / dx * (flux[i + 1] - flux[i]);
    }
    const auto delta = solve(implicit_diffusion(weight, kf, dt, dx, Wall::Even), defect, "heat conduction");
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      theta_new[i] += delta[i];
      diff = std::max(diff, std::abs(delta[i]));
      scale = std::max(scale, std::abs(theta_new[i]));
    }
    change = diff / std::max(scale, std::numeric_limits<double>::min());
    ++iters;
    if (!std::isfinite(change)) {
      throw SolverError(SolverError::Kind::Iteration, "heat conduction: non-finite Picard iterate", change);
    }
    if (change <= cfg.picard_tol) break;
    if (iters >= cfg.picard_max_iters) {
      std::ostringstream msg;
      msg << "heat conduction: Picard iteration did not converge in " << iters << " iterations (relative change "
          << change << ")";
      throw SolverError(SolverError::Kind::Iteration, msg.str(), change);
    }
  }
  report.picard_iters = iters;

  for (std::size_t i = 0; i < n; ++i) {
    if (theta_new[i] < 0.0) {
      if (theta_new[i] < -cfg.theta_floor_tol) {
        std::ostringstream msg;
        msg << "temperature undershoot " << theta_new[i] << " at cell " << i;
        throw SolverError(SolverError::Kind::Positivity, msg.str(), theta_new[i]);
      }
      theta_new[i] = 0.0;
      ++report.clipped_cells;
    }
  }

  State next(t_new, std::move(rho_new), u_new, std::move(w_new), std::move(b_new), std::move(theta_new));
  if (opts.compute_residuals) {
    const auto [r1, r2] = consistency_residuals(s, next, dt, grid, params);
    report.max_div_residual = std::max(r1, r2);
  }
  return {std::move(next), report};
}

struct RunHooks {
  /// Receives a record at t = 0, every `record_every` steps and at the end.
  std::function<void(const DiagnosticsRecord&)> sink;
  std::size_t record_every = 1;
  /// Weighted-dissipation exponent; NaN selects min(1, q) / 2.
  double alpha = std::numeric_limits<double>::quiet_NaN();
  const Forcing* forcing = nullptr;
  std::function<void(const State& before, const State& after, const StepReport&)> on_step;
  /// Steps are shortened to land exactly on each of these times (in [0, t_end]);
  /// on_stop receives the state there.
  std::vector<double> stop_times;
  std::function<void(const State&)> on_stop;
};

/// Integrates from the initial data to t_end; the last step is shortened to
/// land on t_end exactly. Solver errors are rethrown with time and step index.
inline State run(const InitialData& init, double t_end, const Grid& grid, const PhysParams& params,
                 const SchemeConfig& cfg, const RunHooks& hooks = {}) {
  params.validate();
  cfg.validate();
  if (!(t_end >= 0.0)) throw DomainError("run: t_end must be >= 0");
  if (hooks.record_every == 0) throw DomainError("run: record_every must be >= 1");
  State state = init.to_state();
  if (state.size() != grid.n_cells()) throw DomainError("run: initial data and grid sizes differ");

  const double alpha = std::isnan(hooks.alpha) ? default_alpha(params) : hooks.alpha;
  std::optional<DiagnosticsTracker> tracker;
  if (hooks.sink) {
    tracker.emplace(grid, params, alpha, state);
    hooks.sink(tracker->record());
  }
  StepOptions opts;
  opts.forcing = hooks.forcing;
  opts.compute_residuals = static_cast<bool>(hooks.on_step);

  std::vector<double> requested(hooks.stop_times);
  for (double ts : requested) {
    if (!(ts >= 0.0 && ts <= t_end)) throw DomainError("run: stop time outside [0, t_end]");
  }
  std::sort(requested.begin(), requested.end());
  std::vector<double> stops(requested);
  stops.push_back(t_end);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
  std::size_t next_stop = 0;
  const double eps_t = 1e-14 * std::max(1.0, t_end);
  auto fire_stops = [&](const State& s) {
    for (; next_stop < stops.size() && stops[next_stop] <= s.time() + eps_t; ++next_stop) {
      if (hooks.on_stop && std::binary_search(requested.begin(), requested.end(), stops[next_stop])) hooks.on_stop(s);
    }
  };
  fire_stops(state);

  std::size_t steps = 0;
  bool recorded_last = true;
  while (state.time() < t_end) {
    const double remaining = t_end - state.time();
    if (remaining <= eps_t) break;
    const double target = stops[next_stop];
    double dt = stable_dt(state, grid, params, cfg);
    const bool last = dt >= target - state.time();
    if (last) dt = target - state.time();
    std::pair<State, StepReport> result = [&] {
      try {
        return step(state, dt, grid, params, cfg, opts);
      } catch (const SolverError& e) {
        std::ostringstream msg;
        msg << e.what() << " (t=" << state.time() << ", step " << steps << ")";
        throw SolverError(e.kind(), msg.str(), e.residual());
      }
    }();
    ++steps;
    State next = last ? result.first.with_time(target) : std::move(result.first);
    if (hooks.on_step) hooks.on_step(state, next, result.second);
    if (tracker) {
      tracker->advance(state, next, dt);
      recorded_last = steps % hooks.record_every == 0;
      if (recorded_last) hooks.sink(tracker->record());
    }
    state = std::move(next);
    fire_stops(state);
  }
  if (tracker && !recorded_last) hooks.sink(tracker->record());
  return state;
}

}  // namespace planar_mhd

#endif  // PLANAR_MHD_SOLVER_HPP
