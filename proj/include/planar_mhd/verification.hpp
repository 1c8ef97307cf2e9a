#ifndef PLANAR_MHD_VERIFICATION_HPP
#define PLANAR_MHD_VERIFICATION_HPP

// Verification harnesses: manufactured-solution convergence, the
// rho0 + delta continuation study, and sampled checks of the weighted
// sup-norm inequality
//   ||v||_inf <= (K/M) ||v_x||_2 + (1/M) |int rho v|,   M <= int rho <= K.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "planar_mhd/core.hpp"
#include "planar_mhd/initdata.hpp"
#include "planar_mhd/solver.hpp"
#include "planar_mhd/stencils.hpp"

namespace planar_mhd {

struct ExactFields {
  double rho = 1.0;
  double u = 0.0;
  Vec2 w{0.0, 0.0};
  Vec2 b{0.0, 0.0};
  double theta = 1.0;
};

using ExactSolution = std::function<ExactFields(double x, double t)>;

namespace detail {

// Fourth-order central differences of a scalar function.
template <class F>
double d1(F&& f, double x, double h) {
  return (8 * (f(x + h) - f(x - h)) - (f(x + 2 * h) - f(x - 2 * h))) / (12 * h);
}

template <class F>
double d2(F&& f, double x, double h) {
  // Differences against f(x) first: exact zero for constants.
  const double f0 = f(x);
  return (16 * ((f(x - h) - f0) + (f(x + h) - f0)) - ((f(x - 2 * h) - f0) + (f(x + 2 * h) - f0))) / (12 * h * h);
}

inline ForcingValues forcing_at(const ExactSolution& exact, const PhysParams& p, double x, double t, double h) {
  const ExactFields e = exact(x, t);
  auto at_x = [&](auto proj) { return [&, proj](double xx) { return proj(exact(xx, t)); }; };
  auto at_t = [&](auto proj) { return [&, proj](double tt) { return proj(exact(x, tt)); }; };

  ForcingValues f;
  f.rho = d1(at_t([](const ExactFields& s) { return s.rho; }), t, h) +
          d1(at_x([](const ExactFields& s) { return s.rho * s.u; }), x, h);

  f.momentum = d1(at_t([](const ExactFields& s) { return s.rho * s.u; }), t, h) +
               d1(at_x([&p](const ExactFields& s) {
                    return s.rho * s.u * s.u + p.gas_R * s.rho * s.theta + 0.5 * norm2(s.b);
                  }),
                  x, h) -
               p.lambda_visc * d2(at_x([](const ExactFields& s) { return s.u; }), x, h);

  double heating = 0.0;
  const double u_x = d1(at_x([](const ExactFields& s) { return s.u; }), x, h);
  heating += p.lambda_visc * u_x * u_x;
  for (std::size_t c = 0; c < 2; ++c) {
    f.transverse[c] = d1(at_t([c](const ExactFields& s) { return s.rho * s.w[c]; }), t, h) +
                      d1(at_x([c](const ExactFields& s) { return s.rho * s.u * s.w[c] - s.b[c]; }), x, h) -
                      p.mu_visc * d2(at_x([c](const ExactFields& s) { return s.w[c]; }), x, h);
    f.induction[c] = d1(at_t([c](const ExactFields& s) { return s.b[c]; }), t, h) +
                     d1(at_x([c](const ExactFields& s) { return s.u * s.b[c] - s.w[c]; }), x, h) -
                     p.nu_mag * d2(at_x([c](const ExactFields& s) { return s.b[c]; }), x, h);
    const double w_x = d1(at_x([c](const ExactFields& s) { return s.w[c]; }), x, h);
    const double b_x = d1(at_x([c](const ExactFields& s) { return s.b[c]; }), x, h);
    heating += p.mu_visc * w_x * w_x + p.nu_mag * b_x * b_x;
  }

  // (kappa(theta) theta_x)_x = kappa'(theta) theta_x^2 + kappa(theta) theta_xx
  const double th_x = d1(at_x([](const ExactFields& s) { return s.theta; }), x, h);
  const double th_xx = d2(at_x([](const ExactFields& s) { return s.theta; }), x, h);
  const double dkappa = p.kappa_b * p.q_exp * std::pow(e.theta, p.q_exp - 1.0);
  const double conduction = dkappa * th_x * th_x + kappa(e.theta, p) * th_xx;

  f.energy = p.c_v * (d1(at_t([](const ExactFields& s) { return s.rho * s.theta; }), t, h) +
                      d1(at_x([](const ExactFields& s) { return s.rho * s.u * s.theta; }), x, h)) -
             conduction - heating + p.gas_R * e.rho * e.theta * u_x;
  return f;
}

inline double max_forcing_gap(const ForcingValues& a, const ForcingValues& b) {
  double m = std::max(std::abs(a.rho - b.rho), std::abs(a.momentum - b.momentum));
  m = std::max(m, std::abs(a.energy - b.energy));
  for (std::size_t c = 0; c < 2; ++c) {
    m = std::max({m, std::abs(a.transverse[c] - b.transverse[c]), std::abs(a.induction[c] - b.induction[c])});
  }
  return m;
}

}  // namespace detail

/// Manufactured solution: closed-form fields plus the forcing that makes them
/// solve the forced system. The forcing is built by fourth-order numerical
/// differentiation of the closed forms.
class MMSCase {
 public:
  static constexpr double kStencil = 1e-3;

  MMSCase(std::string name, ExactSolution exact, PhysParams params)
      : name_(std::move(name)), exact_(std::move(exact)), params_(params) {
    params_.validate();
    const double gap = self_check();
    if (gap > 1e-8) {
      std::ostringstream msg;
      msg << "MMS case '" << name_ << "': forcing self-check residual " << std::scientific << gap;
      throw DomainError(msg.str());
    }
  }

  const std::string& name() const { return name_; }
  const PhysParams& params() const { return params_; }
  ExactFields exact(double x, double t) const { return exact_(x, t); }

  ForcingValues forcing(double x, double t, double h = kStencil) const {
    return detail::forcing_at(exact_, params_, x, t, h);
  }

  Forcing forcing_fn() const {
    return [this](double x, double t) { return forcing(x, t); };
  }

  /// Largest difference between the forcing built with stencil widths h and
  /// h/2 over a dense (x, t) sample. Both are fourth-order, so the gap bounds
  /// the residual of the forced equations at the exact fields.
  double self_check() const {
    double gap = 0.0;
    for (int it = 0; it <= 4; ++it) {
      const double t = 0.25 * it;
      for (int ix = 0; ix <= 200; ++ix) {
        const double x = ix / 200.0;
        gap = std::max(gap, detail::max_forcing_gap(forcing(x, t, kStencil), forcing(x, t, 0.5 * kStencil)));
      }
    }
    return gap;
  }

  InitialData initial_data(const Grid& grid) const {
    InitialData d;
    for (std::size_t i = 0; i < grid.n_cells(); ++i) {
      const auto e = exact_(grid.center(i), 0.0);
      d.rho0.push_back(e.rho);
      d.u0.push_back(e.u);
      d.w0.push_back(e.w);
      d.b0.push_back(e.b);
      d.theta0.push_back(e.theta);
    }
    return d;
  }

 private:
  std::string name_;
  ExactSolution exact_;
  PhysParams params_;
};

inline const std::vector<std::string>& mms_case_names() {
  static const std::vector<std::string> names = {"smooth-wave", "constant"};
  return names;
}

/// "smooth-wave": every field a low trigonometric mode in x with odd (u, w, b)
/// or even (rho, theta) reflection symmetry at both walls, so the exact fields
/// honour the wall conditions for all t; period 1 in t.
/// "constant": rho = 1.3, theta = 0.7, u = w = b = 0, a discrete steady state.
inline MMSCase mms_case(std::string_view name, const PhysParams& params = {}) {
  using std::numbers::pi;
  if (name == "smooth-wave") {
    return MMSCase("smooth-wave",
                   [](double x, double t) {
                     const double c = std::cos(2 * pi * t);
                     const double s = std::sin(2 * pi * t);
                     ExactFields e;
                     e.rho = 1.0 + 0.2 * std::cos(pi * x) * c;
                     e.u = 0.1 * std::sin(2 * pi * x) * c;
                     e.w = Vec2{0.1 * std::sin(pi * x) * c, 0.05 * std::sin(2 * pi * x) * (1.0 + s)};
                     e.b = Vec2{0.1 * std::sin(pi * x) * (1.0 + 0.5 * s), 0.1 * std::sin(2 * pi * x) * c};
                     e.theta = 1.0 + 0.1 * std::cos(pi * x) * c;
                     return e;
                   },
                   params);
  }
  if (name == "constant") {
    return MMSCase("constant",
                   [](double, double) {
                     ExactFields e;
                     e.rho = 1.3;
                     e.theta = 0.7;
                     return e;
                   },
                   params);
  }
  throw LookupError("unknown MMS case '" + std::string(name) + "'");
}

inline constexpr std::size_t kMmsFieldCount = 5;
inline const std::array<const char*, kMmsFieldCount> kMmsFieldNames = {"rho", "u", "w", "b", "theta"};

struct MMSResult {
  std::string case_name;
  std::vector<std::size_t> resolutions;
  /// errors[r][f]: discrete L2 error of field f at resolution r.
  std::vector<std::array<double, kMmsFieldCount>> errors;
  /// Least-squares slope of log error against log dx; nullopt marks a field
  /// reproduced exactly (all errors below 1e-12).
  std::array<std::optional<double>, kMmsFieldCount> orders;
};

inline std::array<double, kMmsFieldCount> mms_errors(const MMSCase& mms, const State& s, const Grid& grid) {
  std::array<double, kMmsFieldCount> sums{};
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto e = mms.exact(grid.center(i), s.time());
    const double dr = s.rho()[i] - e.rho;
    const double du = s.u()[i] - e.u;
    const double dth = s.theta()[i] - e.theta;
    const Vec2 dw{s.w()[i][0] - e.w[0], s.w()[i][1] - e.w[1]};
    const Vec2 db{s.b()[i][0] - e.b[0], s.b()[i][1] - e.b[1]};
    sums[0] += dr * dr;
    sums[1] += du * du;
    sums[2] += norm2(dw);
    sums[3] += norm2(db);
    sums[4] += dth * dth;
  }
  for (double& v : sums) v = std::sqrt(v * grid.dx());
  return sums;
}

/// Runs the forced solver at each resolution (in parallel) and fits observed
/// orders. A failed run rethrows with the resolution in the message.
inline MMSResult mms_convergence(const MMSCase& mms, const std::vector<std::size_t>& resolutions, double t_end,
                                 const SchemeConfig& cfg) {
  if (resolutions.size() < 2) throw DomainError("mms_convergence: need at least two resolutions");
  for (std::size_t k = 1; k < resolutions.size(); ++k) {
    if (resolutions[k] <= resolutions[k - 1]) throw DomainError("mms_convergence: resolutions must increase");
  }
  MMSResult out;
  out.case_name = mms.name();
  out.resolutions = resolutions;
  std::vector<std::future<std::array<double, kMmsFieldCount>>> jobs;
  for (std::size_t n : resolutions) {
    jobs.push_back(std::async(std::launch::async, [&mms, n, t_end, cfg] {
      const Grid grid(n);
      const Forcing forcing = mms.forcing_fn();
      RunHooks hooks;
      hooks.forcing = &forcing;
      try {
        const State fin = run(mms.initial_data(grid), t_end, grid, mms.params(), cfg, hooks);
        return mms_errors(mms, fin, grid);
      } catch (const SolverError& e) {
        throw SolverError(e.kind(), std::string(e.what()) + " [n=" + std::to_string(n) + "]", e.residual());
      }
    }));
  }
  for (auto& j : jobs) out.errors.push_back(j.get());

  for (std::size_t f = 0; f < kMmsFieldCount; ++f) {
    bool exact = true;
    for (const auto& e : out.errors) exact = exact && e[f] < 1e-12;
    if (exact) continue;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(resolutions.size());
    for (std::size_t r = 0; r < resolutions.size(); ++r) {
      const double lx = std::log2(1.0 / static_cast<double>(resolutions[r]));
      const double ly = std::log2(std::max(out.errors[r][f], std::numeric_limits<double>::min()));
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    out.orders[f] = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
  return out;
}

/// Discrete L2 distance in the conserved variables (rho, rho u, rho w, b, rho e).
inline double conserved_distance(const State& a, const State& b, const Grid& grid, const PhysParams& params) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double dr = a.rho()[i] - b.rho()[i];
    const double dm = a.rho()[i] * a.u()[i] - b.rho()[i] * b.u()[i];
    const double de = params.c_v * (a.rho()[i] * a.theta()[i] - b.rho()[i] * b.theta()[i]);
    const Vec2 dmw{a.rho()[i] * a.w()[i][0] - b.rho()[i] * b.w()[i][0],
                   a.rho()[i] * a.w()[i][1] - b.rho()[i] * b.w()[i][1]};
    const Vec2 db{a.b()[i][0] - b.b()[i][0], a.b()[i][1] - b.b()[i][1]};
    sum += dr * dr + dm * dm + norm2(dmw) + norm2(db) + de * de;
  }
  return std::sqrt(sum * grid.dx());
}

struct PairDistance {
  double delta_from = 0.0;
  double delta_to = 0.0;
  double distance = 0.0;
};

struct ContinuationReport {
  std::vector<double> deltas;
  std::vector<PairDistance> pairwise_dists;
  /// Error message per delta; empty when that run succeeded.
  std::vector<std::string> failures;
  bool monotone = true;
};

/// Runs regularize(base, delta) to t_end for every delta and compares
/// consecutive final states. A failed run is recorded and skipped.
inline ContinuationReport continuation_study(const InitialData& base, const std::vector<double>& deltas, double t_end,
                                             const Grid& grid, const PhysParams& params, const SchemeConfig& cfg) {
  if (deltas.empty()) throw DomainError("continuation: empty delta list");
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    if (!(deltas[k] > 0.0)) throw DomainError("continuation: deltas must be > 0");
    if (k > 0 && !(deltas[k] < deltas[k - 1])) throw DomainError("continuation: deltas must strictly decrease");
  }
  ContinuationReport rep;
  rep.deltas = deltas;
  rep.failures.assign(deltas.size(), {});

  std::vector<std::future<State>> jobs;
  for (double delta : deltas) {
    jobs.push_back(std::async(std::launch::async, [&base, delta, t_end, &grid, &params, &cfg] {
      return run(regularize(base, delta), t_end, grid, params, cfg);
    }));
  }
  std::vector<std::optional<State>> finals(deltas.size());
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    try {
      finals[k] = jobs[k].get();
    } catch (const std::exception& e) {
      rep.failures[k] = e.what();
    }
  }
  for (std::size_t k = 0; k + 1 < deltas.size(); ++k) {
    if (!finals[k] || !finals[k + 1]) continue;
    rep.pairwise_dists.push_back({deltas[k], deltas[k + 1], conserved_distance(*finals[k], *finals[k + 1], grid, params)});
  }
  for (std::size_t k = 1; k < rep.pairwise_dists.size(); ++k) {
    if (rep.pairwise_dists[k].distance > rep.pairwise_dists[k - 1].distance) rep.monotone = false;
  }
  return rep;
}

struct EmbeddingTerms {
  double lhs = 0.0;  // max |v_i|
  double rhs = 0.0;  // (K/M) ||v_x||_2 + (1/M) |int rho v|
};

/// Both sides of the weighted sup-norm inequality with M = K = int rho. The
/// gradient norm runs over interior faces only (v carries no boundary
/// condition).
inline EmbeddingTerms embedding_terms(std::span<const double> v, std::span<const double> rho, const Grid& grid) {
  const double dx = grid.dx();
  double total = 0.0, weighted = 0.0, grad = 0.0, sup = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    total += rho[i] * dx;
    weighted += rho[i] * v[i] * dx;
    sup = std::max(sup, std::abs(v[i]));
    if (i > 0) {
      const double g = (v[i] - v[i - 1]) / dx;
      grad += g * g * dx;
    }
  }
  if (!(total > 0.0)) throw DomainError("embedding check: total mass must be positive");
  return {sup, std::sqrt(grad) + std::abs(weighted) / total};
}

inline double embedding_ratio(std::span<const double> v, std::span<const double> rho, const Grid& grid) {
  const auto t = embedding_terms(v, rho, grid);
  if (t.rhs == 0.0) return t.lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return t.lhs / t.rhs;
}

/// Worst lhs/rhs over `trials` random smooth test functions (constant plus up
/// to six random cosine/sine modes).
inline double embedding_check(const State& s, const Grid& grid, std::size_t trials, std::uint64_t seed = 0) {
  double total = 0.0;
  for (double r : s.rho()) total += r * grid.dx();
  if (!(total > 0.0)) throw DomainError("embedding check: total mass must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> coef(0.0, 1.0);
  std::uniform_int_distribution<int> modes(1, 6);
  double worst = 0.0;
  std::vector<double> v(s.size());
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const double c0 = coef(rng);
    const int m = modes(rng);
    std::vector<double> a(m), b(m);
    for (int k = 0; k < m; ++k) {
      a[k] = coef(rng) / (k + 1);
      b[k] = coef(rng) / (k + 1);
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double x = grid.center(i);
      double val = c0;
      for (int k = 0; k < m; ++k) {
        val += a[k] * std::cos((k + 1) * std::numbers::pi * x) + b[k] * std::sin((k + 1) * std::numbers::pi * x);
      }
      v[i] = val;
    }
    worst = std::max(worst, embedding_ratio(v, s.rho(), grid));
  }
  return worst;
}

/// The power variant applied to the temperature: ratio for v = theta^r.
inline double embedding_power_ratio(const State& s, const Grid& grid, double r) {
  std::vector<double> v(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) v[i] = std::pow(s.theta()[i], r);
  return embedding_ratio(v, s.rho(), grid);
}

}  // namespace planar_mhd

#endif  // PLANAR_MHD_VERIFICATION_HPP
