#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "planar_mhd/diagnostics.hpp"
#include "planar_mhd/solver.hpp"
#include "test_support.hpp"

using namespace planar_mhd;
using std::numbers::pi;
using testing_support::random_state;

namespace {

State make_state(const Grid& g, double rho, double theta, Vec2 b = {0, 0}, double t = 0.0) {
  const std::size_t n = g.n_cells();
  return State(t, std::vector<double>(n, rho), std::vector<double>(n, 0.0), std::vector<Vec2>(n, Vec2{0, 0}),
               std::vector<Vec2>(n, b), std::vector<double>(n, theta));
}

State with_u(const State& s, const std::vector<double>& u) {
  return State(s.time(), s.rho(), u, s.w(), s.b(), s.theta());
}

std::vector<DiagnosticsRecord> record_run(const std::string& name, std::size_t n, double t_end,
                                          const PhysParams& p = {}) {
  const Grid g(n);
  std::vector<DiagnosticsRecord> out;
  RunHooks hooks;
  hooks.sink = [&](const DiagnosticsRecord& r) { out.push_back(r); };
  run(scenario(name, g), t_end, g, p, SchemeConfig{}, hooks);
  return out;
}

}  // namespace

TEST(TotalEnergy, Examples) {
  const Grid g(10);
  EXPECT_NEAR(total_energy(make_state(g, 1.0, 1.0, {1.0, 0.0}), g, PhysParams{}), 1.5, 1e-14);
  EXPECT_EQ(total_energy(make_state(g, 0.0, 0.0), g, PhysParams{}), 0.0);
}

TEST(TotalEnergy, GaussianDensityMatchesRefinedQuadrature) {
  // The integrand is closed-form, so doubling the quadrature resolution is an
  // independent oracle; the midpoint error at n=512 is ~3e-11 relative.
  const Grid g(512), g2(1024);
  const double e = total_energy(scenario("gaussian-density", g).to_state(), g, PhysParams{});
  const double e2 = total_energy(scenario("gaussian-density", g2).to_state(), g2, PhysParams{});
  EXPECT_NEAR(e, e2, 1e-10 * e2);
  EXPECT_NEAR(e, 1.0 + 0.5 * 0.1 * std::sqrt(2 * pi) * std::erf(5.0 / std::sqrt(2.0)), 1e-9);
}

TEST(EntropyFunctional, Examples) {
  const Grid g(8);
  EXPECT_EQ(entropy_functional(make_state(g, 1.0, 1.0), g), 0.0);
  EXPECT_NEAR(entropy_functional(make_state(g, std::exp(1.0), std::exp(1.0)), g), 2 * std::exp(1.0), 1e-13);
  EXPECT_EQ(entropy_functional(make_state(g, 0.0, 1.0), g), 0.0);
  EXPECT_EQ(entropy_functional(make_state(g, 0.0, 0.0), g), 0.0);
  EXPECT_TRUE(std::isinf(entropy_functional(make_state(g, 1.0, 0.0), g)));
}

TEST(Dissipation, EquilibriumPairIsZero) {
  const Grid g(32);
  const State s = make_state(g, 1.0, 1.0);
  const auto d = dissipation_increment(s, s, 0.1, g, PhysParams{});
  EXPECT_EQ(d.visc + d.shear + d.mag + d.heat, 0.0);
  EXPECT_EQ(weighted_dissipation_increment(s, s, 0.1, g, PhysParams{}, 0.5), 0.0);
  EXPECT_EQ(entropy_production_increment(s, 0.1, g, PhysParams{}), 0.0);
}

TEST(Dissipation, SineProfileMatchesQuadratureOracle) {
  // u = sin(2 pi x): int u_x^2 = 2 pi^2.
  const Grid g(400);
  std::vector<double> u(400);
  for (std::size_t i = 0; i < 400; ++i) u[i] = std::sin(2 * pi * g.center(i));
  const State s = with_u(make_state(g, 1.0, 1.0), u);
  const double dt = 0.01;
  const auto d = dissipation_increment(s, s, dt, g, PhysParams{});
  EXPECT_NEAR(d.visc, 2 * pi * pi * dt, 1e-3 * 2 * pi * pi * dt);
  EXPECT_EQ(d.shear, 0.0);
  EXPECT_EQ(d.heat, 0.0);
  PhysParams p2;
  p2.lambda_visc = 3.0;
  EXPECT_NEAR(dissipation_increment(s, s, dt, g, p2).visc, 3.0 * d.visc, 1e-14);
}

namespace {

// Relative gap of the mechanical energy balance on magnetic-pulse to t = 0.1:
// kinetic + magnetic energy is lost to the three viscous channels and
// exchanged with internal energy through the pressure work int P u_x.
double mechanical_balance_gap(std::size_t n) {
  const Grid g(n);
  const PhysParams p;
  DiagnosticsRecord last_rec;
  const State first = scenario("magnetic-pulse", g).to_state();
  State last = first;
  double work = 0.0;
  RunHooks hooks;
  hooks.sink = [&](const DiagnosticsRecord& r) { last_rec = r; };
  hooks.on_step = [&](const State& before, const State& after, const StepReport&) {
    const double dt = after.time() - before.time();
    const auto ux = cell_derivative(after.u(), g.dx(), Wall::Odd);
    for (std::size_t i = 0; i < n; ++i) work += dt * g.dx() * pressure(after.rho()[i], after.theta()[i], p) * ux[i];
    last = after;
  };
  run(scenario("magnetic-pulse", g), 0.1, g, p, SchemeConfig{}, hooks);
  auto mechanical = [&](const State& s) {
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      e += 0.5 * (norm2(s.b()[i]) + s.rho()[i] * (s.u()[i] * s.u()[i] + norm2(s.w()[i])));
    }
    return e * g.dx();
  };
  const double drop = mechanical(first) - mechanical(last);
  const double diss = last_rec.diss_visc + last_rec.diss_mag + last_rec.diss_shear;
  return std::abs(diss - work - drop) / drop;
}

}  // namespace

TEST(Dissipation, MagneticPulseMechanicalEnergyBalance) {
  // The gap is the scheme's first-order energy defect (measured 7.5% at
  // n = 256, 4.1% at n = 512); it must close under refinement.
  const double g256 = mechanical_balance_gap(256);
  const double g512 = mechanical_balance_gap(512);
  EXPECT_LT(g256, 0.1);
  EXPECT_GT(g256 / g512, 1.6);
}

TEST(WeightedDissipation, UnitTemperatureReducesToPlainPieces) {
  const Grid g(200);
  PhysParams p;
  std::vector<double> u(200);
  for (std::size_t i = 0; i < 200; ++i) u[i] = 0.3 * std::sin(pi * g.center(i));
  const State s = with_u(make_state(g, 1.0, 1.0), u);
  const auto d = dissipation_increment(s, s, 0.1, g, p);
  EXPECT_NEAR(weighted_dissipation_increment(s, s, 0.1, g, p, 0.3), d.visc + d.shear + d.mag + d.heat, 1e-15);
}

TEST(WeightedDissipation, RejectsInadmissibleAlpha) {
  const Grid g(8);
  const State s = make_state(g, 1.0, 1.0);
  PhysParams p;
  p.q_exp = 0.5;
  EXPECT_THROW(weighted_dissipation_increment(s, s, 0.1, g, p, 0.5), DomainError);
  EXPECT_THROW(weighted_dissipation_increment(s, s, 0.1, g, p, 0.9), DomainError);
  EXPECT_THROW(weighted_dissipation_increment(s, s, 0.1, g, p, 0.0), DomainError);
  EXPECT_NO_THROW(weighted_dissipation_increment(s, s, 0.1, g, p, 0.49));
  EXPECT_DOUBLE_EQ(default_alpha(p), 0.25);
  p.q_exp = 3.0;
  EXPECT_DOUBLE_EQ(default_alpha(p), 0.5);
  EXPECT_FALSE(alpha_admissible(1.0, p));
}

TEST(Phi, ConstantPressureRestStateDecreasesLinearly) {
  const Grid g(16);
  PhysParams p;
  const double p0 = 1.7;
  State s = make_state(g, 1.0, p0);
  PhiField phi = initial_phi(s, g);
  for (double x : phi.phi) EXPECT_EQ(x, 0.0);
  EXPECT_EQ(density_bound_monitor(phi, s), 1.0);
  double prev = 1.0;
  for (int k = 1; k <= 10; ++k) {
    const State next = s.with_time(0.1 * k);
    phi = update_phi(phi, s, next, 0.1, g, p).field;
    for (double x : phi.phi) EXPECT_NEAR(x, -p0 * 0.1 * k, 1e-14);
    const double m = density_bound_monitor(phi, next);
    EXPECT_NEAR(m, std::exp(-p0 * 0.1 * k), 1e-14);
    EXPECT_LT(m, prev);
    prev = m;
    s = next;
  }
}

TEST(Phi, InitialPhiIntegratesMomentum) {
  const Grid g(50);
  const double c = 0.3;
  const State s = with_u(make_state(g, 1.0, 1.0), std::vector<double>(50, c));
  const auto phi = initial_phi(s, g);
  for (std::size_t i = 0; i < 50; ++i) EXPECT_NEAR(phi.phi[i], c * g.center(i), 1e-15);
  EXPECT_NEAR(phi_residual(phi, s, g), 0.0, 1e-14);
}

TEST(Phi, MonitorAtTimeZeroIsMaxDensity) {
  for (const auto& name : scenario_names()) {
    const Grid g(64);
    const State s = scenario(name, g).to_state();
    if (name == "smooth-shear") continue;  // u0 != 0
    EXPECT_DOUBLE_EQ(density_bound_monitor(initial_phi(s, g), s), *std::max_element(s.rho().begin(), s.rho().end()));
  }
}

TEST(Phi, UpdateRejectsStalePhi) {
  const Grid g(8);
  const State s = make_state(g, 1.0, 1.0);
  PhiField phi = initial_phi(s, g);
  phi.time = 0.5;
  EXPECT_THROW(update_phi(phi, s, s.with_time(0.1), 0.1, g, PhysParams{}), DomainError);
}

TEST(Phi, VacuumPocketResidualShrinksUnderRefinement) {
  std::vector<double> res;
  for (std::size_t n : {128u, 256u}) {
    const auto recs = record_run("vacuum-pocket", n, 0.1);
    double worst = 0.0;
    for (const auto& r : recs) worst = std::max(worst, r.norms.at("phi_residual"));
    res.push_back(worst);
  }
  EXPECT_GT(res[0] / res[1], 1.5);
}

TEST(NormSuite, EquilibriumPair) {
  const Grid g(32);
  PhysParams p;
  p.gas_R = 2.0;
  p.q_exp = 1.5;
  const State s = make_state(g, 1.0, 1.0);
  const auto norms = norm_suite(s, s, 0.1, g, p);
  for (const auto& [k, v] : norms) {
    if (k == "p_l2sq") {
      EXPECT_NEAR(v, 4.0, 1e-14);
    } else if (k == "rho_theta_q2_int") {
      EXPECT_NEAR(v, 1.0, 1e-14);
    } else {
      EXPECT_EQ(v, 0.0) << k;
    }
  }
}

TEST(NormSuite, SineSeminorm) {
  const Grid g(512);
  std::vector<double> u(512);
  for (std::size_t i = 0; i < 512; ++i) u[i] = std::sin(2 * pi * g.center(i));
  const State s = with_u(make_state(g, 1.0, 1.0), u);
  EXPECT_NEAR(norm_suite(s, s, 0.1, g, PhysParams{}).at("u_x_l2sq"), 2 * pi * pi, 1e-3 * 2 * pi * pi);
}

TEST(NormSuite, NonnegativeAndQuadraticHomogeneity) {
  const Grid g(64);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const State a = random_state(g, seed);
    const State b = random_state(g, seed + 1000);
    const auto n1 = norm_suite(a, b, 0.01, g, PhysParams{});
    std::vector<double> u2(b.u());
    std::vector<Vec2> w2(b.w()), b2(b.b());
    for (auto& x : u2) x *= 2;
    for (auto& v : w2) v = Vec2{2 * v[0], 2 * v[1]};
    for (auto& v : b2) v = Vec2{2 * v[0], 2 * v[1]};
    std::vector<Vec2> wa(a.w()), ba(a.b());
    std::vector<double> ua(a.u());
    for (auto& x : ua) x *= 2;
    for (auto& v : wa) v = Vec2{2 * v[0], 2 * v[1]};
    for (auto& v : ba) v = Vec2{2 * v[0], 2 * v[1]};
    const State a2(a.time(), a.rho(), ua, wa, ba, a.theta());
    const State bb2(b.time(), b.rho(), u2, w2, b2, b.theta());
    const auto n2 = norm_suite(a2, bb2, 0.01, g, PhysParams{});
    for (const auto& [k, v] : n1) {
      EXPECT_GE(v, 0.0) << k;
      const bool scaled = k.rfind("u_", 0) == 0 || k.rfind("w_", 0) == 0 || k.rfind("b_", 0) == 0 ||
                          k == "sqrt_rho_u_t_l2sq" || k == "sqrt_rho_w_t_l2sq";
      if (scaled) {
        EXPECT_NEAR(n2.at(k), 4.0 * v, 1e-10 * (1 + v)) << k;
      }
    }
  }
}

TEST(Tracker, CumulativeRecordsAreMonotone) {
  for (const auto& name : scenario_names()) {
    const auto recs = record_run(name, 64, 0.1);
    ASSERT_GE(recs.size(), 2u);
    for (std::size_t k = 1; k < recs.size(); ++k) {
      EXPECT_GE(recs[k].entropy_prod_cum, recs[k - 1].entropy_prod_cum) << name;
      EXPECT_GE(recs[k].diss_visc, recs[k - 1].diss_visc);
      EXPECT_GE(recs[k].diss_shear, recs[k - 1].diss_shear);
      EXPECT_GE(recs[k].diss_mag, recs[k - 1].diss_mag);
      EXPECT_GE(recs[k].diss_heat, recs[k - 1].diss_heat);
      EXPECT_GE(recs[k].weighted_diss, recs[k - 1].weighted_diss);
      EXPECT_GE(recs[k].norms.at("theta_sup_pow_int"), recs[k - 1].norms.at("theta_sup_pow_int"));
      EXPECT_TRUE(std::isfinite(recs[k].energy) && std::isfinite(recs[k].mass));
      EXPECT_EQ(recs[k].norms.size(), recs[0].norms.size());
    }
  }
}

TEST(Tracker, DifferentAlphasBothFinite) {
  PhysParams p;
  p.q_exp = 2.0;
  const Grid g(64);
  for (double alpha : {0.1, 0.9}) {
    std::vector<DiagnosticsRecord> recs;
    RunHooks hooks;
    hooks.alpha = alpha;
    hooks.sink = [&](const DiagnosticsRecord& r) { recs.push_back(r); };
    run(scenario("smooth-shear", g), 0.05, g, p, SchemeConfig{}, hooks);
    EXPECT_TRUE(std::isfinite(recs.back().weighted_diss));
    EXPECT_GT(recs.back().weighted_diss, 0.0);
  }
  EXPECT_THROW(DiagnosticsTracker(g, p, 1.0, scenario("smooth-shear", g).to_state()), DomainError);
}

TEST(Monitor, TracksDriftAndRise) {
  RunMonitor m;
  DiagnosticsRecord r;
  r.mass = 1.0;
  r.energy = 2.0;
  r.rho_F_max = 1.0;
  r.entropy_prod_cum = 0.0;
  m.observe(r);
  r.rho_F_max = 0.9;
  r.entropy_prod_cum = 0.1;
  r.energy = 1.9;
  m.observe(r);
  r.rho_F_max = 0.918;
  r.entropy_prod_cum = 0.05;
  m.observe(r);
  EXPECT_NEAR(m.rho_F_max_rise, 0.02, 1e-12);
  EXPECT_FALSE(m.entropy_prod_monotone);
  EXPECT_NEAR(m.last_energy_rel_drift, -0.05, 1e-12);
}
