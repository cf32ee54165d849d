#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nlsdecay/log.hpp"
#include "nlsdecay/profiles.hpp"
#include "nlsdecay/propagate.hpp"

using namespace nlsd;
using std::numbers::pi;

namespace {

// exp(i t Lap) of exp(-|x|^2/2) in d dimensions.
cplx free_gaussian(double r2, double t, int d) {
  const cplx q(1.0, 2.0 * t);
  return std::pow(q, -0.5 * d) * std::exp(-r2 / (2.0 * q));
}

Field plane_wave(double amp, double k0, std::size_t n = 64) {
  auto grid = make_grid(make_geometry(1, {n}, {2.0 * pi}));
  std::vector<cplx> v(n);
  const auto x = grid->coordinates(0);
  for (std::size_t j = 0; j < n; ++j) v[j] = amp * std::polar(1.0, k0 * x[j]);
  return Field(grid, 0.0, v);
}

}  // namespace

TEST(FreePropagate, PeriodicGaussianOracle) {
  auto grid = make_grid(make_geometry(1, {2048}, {400.0}));
  const auto phi = make_base({1.0, 1.0}, grid);
  const auto r2 = grid->radius2();
  for (double t : {0.5, 3.0, 10.0}) {
    const auto u = free_propagate(phi, t);
    double err = 0.0;
    for (std::size_t j = 0; j < u.values.size(); ++j) err = std::max(err, std::abs(u.values[j] - free_gaussian(r2[j], t, 1)));
    EXPECT_LT(err, 1e-12) << t;
  }
}

TEST(FreePropagate, RadialGaussianOracle) {
  auto grid = make_grid(make_geometry(1, {2048}, {100.0}, Mode::radial_3d));
  const auto phi = make_base({1.0, 1.0}, grid);
  const auto u = free_propagate(phi, 5.0);
  const auto r2 = grid->radius2();
  double err = 0.0;
  for (std::size_t j = 0; j < u.values.size(); ++j)
    err = std::max(err, std::abs(u.values[j] / std::sqrt(r2[j]) - free_gaussian(r2[j], 5.0, 3)));
  EXPECT_LT(err, 1e-12);
  EXPECT_NEAR(norm_linf(u), std::pow(1.0 + 100.0, -0.75), 1e-12);
}

TEST(FreePropagate, GroupPropertyAndTime) {
  auto grid = make_grid(make_geometry(2, {128, 128}, {24.0, 24.0}));
  const auto phi = make_base({1.0, 1.0}, grid);
  const auto a = free_propagate(free_propagate(phi, 1.5), -1.5);
  EXPECT_LT(norm_l2(a - phi), 1e-13);
  EXPECT_DOUBLE_EQ(free_propagate(phi, 2.0).time, 2.0);
  EXPECT_NEAR(norm_l2(free_propagate(phi, 7.0)), norm_l2(phi), 1e-12);
}

TEST(NlsStep, PlaneWaveIsExact) {
  // A exp(i(k x - (k^2 + A^2) t)) solves the defocusing cubic equation.
  const double amp = 0.6, k0 = 2.0, dt = 0.01;
  Field u = plane_wave(amp, k0);
  for (int n = 0; n < 100; ++n) u = nls_step(u, dt);
  const double t = 100 * dt;
  const auto x = u.grid->coordinates(0);
  double err = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j)
    err = std::max(err, std::abs(u.values[j] - amp * std::polar(1.0, k0 * x[j] - (k0 * k0 + amp * amp) * t)));
  EXPECT_LT(err, 1e-11);
  EXPECT_NEAR(u.time, t, 1e-12);
}

TEST(Evolve, ZeroDurationReturnsInput) {
  const auto u0 = plane_wave(0.5, 1.0);
  SolverConfig cfg;
  cfg.t_end = 0.0;
  const auto traj = evolve(u0, cfg);
  ASSERT_EQ(traj.snapshots.size(), 1u);
  EXPECT_EQ(traj.snapshots[0].values, u0.values);
}

TEST(Evolve, SnapshotStrideAndFinalState) {
  const auto u0 = plane_wave(0.5, 1.0);
  SolverConfig cfg;
  cfg.dt = 0.01;
  cfg.t_end = 0.25;
  cfg.snapshot_stride = 10;
  const auto traj = evolve(u0, cfg);
  ASSERT_EQ(traj.snapshots.size(), 4u);  // 0, 0.1, 0.2, 0.25
  EXPECT_NEAR(traj.snapshots[1].time, 0.1, 1e-12);
  EXPECT_NEAR(traj.end_time(), 0.25, 1e-12);
  EXPECT_EQ(traj.conservation.size(), 26u);
  for (std::size_t i = 1; i < traj.snapshots.size(); ++i) EXPECT_GT(traj.snapshots[i].time, traj.snapshots[i - 1].time);
  EXPECT_TRUE(traj.find(0.2).has_value());
  EXPECT_FALSE(traj.find(0.15).has_value());
  EXPECT_THROW((void)traj.at(0.15), ConfigError);
}

TEST(Evolve, ConservesMassAndEnergyOnRadialRun) {
  ScopedWarningCapture quiet;
  auto grid = make_grid(make_geometry(1, {1024}, {60.0}, Mode::radial_3d));
  const auto u0 = make_base({1.0, 1.0}, grid);
  SolverConfig cfg;
  cfg.dt = 0.005;
  cfg.t_end = 2.0;
  cfg.snapshot_stride = 100;
  const auto d = conservation_drift(evolve(u0, cfg));
  EXPECT_LT(d.mass, 1e-11);
  EXPECT_LT(d.energy_excursion, 1e-4);
}

TEST(Evolve, SecondOrderSelfConvergence) {
  auto grid = make_grid(make_geometry(1, {512}, {40.0}, Mode::radial_3d));
  const auto u0 = make_base({1.0, 1.0}, grid);
  auto final_state = [&](double dt) {
    SolverConfig cfg;
    cfg.dt = dt;
    cfg.t_end = 1.0;
    cfg.snapshot_stride = 1000000;
    return evolve(u0, cfg).snapshots.back();
  };
  const auto ref = final_state(0.000625);
  const double e1 = norm_l2(final_state(0.02) - ref);
  const double e2 = norm_l2(final_state(0.01) - ref);
  EXPECT_NEAR(e1 / e2, 4.0, 0.5);
}

TEST(Evolve, ValidationErrors) {
  const auto u0 = plane_wave(0.5, 1.0);
  SolverConfig cfg;
  cfg.dt = 0.0;
  cfg.t_end = 1.0;
  EXPECT_THROW(evolve(u0, cfg), ConfigError);
  cfg.dt = 0.3;
  EXPECT_THROW(evolve(u0, cfg), ConfigError);  // not a multiple
  cfg.dt = 0.1;
  cfg.sponge = Sponge{1.0, 1.0};
  EXPECT_THROW(evolve(u0, cfg), ConfigError);  // sponge needs radial mode
}

TEST(Evolve, NonFiniteInputAborts) {
  auto u0 = plane_wave(0.5, 1.0);
  u0.values[3] = cplx(std::nan(""), 0.0);
  SolverConfig cfg;
  cfg.t_end = 0.1;
  EXPECT_THROW(evolve(u0, cfg), NumericError);
}

TEST(Evolve, DriftLimitAborts) {
  // A coarse step on a large-amplitude bump breaks the energy bound.
  auto grid = make_grid(make_geometry(1, {256}, {20.0}, Mode::radial_3d));
  const auto u0 = make_base({6.0, 0.5}, grid);
  SolverConfig cfg;
  cfg.dt = 0.05;
  cfg.t_end = 1.0;
  cfg.energy_drift_limit = 1e-6;
  EXPECT_THROW(evolve(u0, cfg), NumericError);
}

TEST(Evolve, SpongeDisablesDriftChecksAndAbsorbs) {
  auto grid = make_grid(make_geometry(1, {512}, {40.0}, Mode::radial_3d));
  const auto u0 = make_base({1.0, 1.0}, grid);
  SolverConfig cfg;
  cfg.dt = 0.01;
  cfg.t_end = 20.0;
  cfg.snapshot_stride = 2000;
  cfg.sponge = Sponge{25.0, 5.0};
  const auto traj = evolve(u0, cfg);
  EXPECT_TRUE(traj.sponge_active);
  EXPECT_LT(mass(traj.snapshots.back()), 0.9 * mass(u0));
}

TEST(Evolve, LinearModeMatchesFreePropagator) {
  auto grid = make_grid(make_geometry(1, {512}, {40.0}, Mode::radial_3d));
  const auto u0 = make_base({1.0, 1.0}, grid);
  SolverConfig cfg;
  cfg.dt = 0.05;
  cfg.t_end = 2.0;
  cfg.nonlinear = false;
  cfg.dealias = false;
  const auto traj = evolve(u0, cfg);
  EXPECT_LT(norm_l2(traj.snapshots.back() - free_propagate(u0, 2.0)), 1e-12);
}
