#include <gtest/gtest.h>

#include <cmath>

#include "nlsdecay/ratefit.hpp"
#include "nlsdecay/report.hpp"

using namespace nlsd;

namespace {
std::vector<Sample> power_law(double amp, double p, double t0, double t1, int n) {
  std::vector<Sample> s;
  for (int i = 0; i < n; ++i) {
    const double t = t0 * std::pow(t1 / t0, static_cast<double>(i) / (n - 1));
    s.emplace_back(t, amp * std::pow(t, p));
  }
  return s;
}
}  // namespace

TEST(FitPowerLaw, RecoversExactExponents) {
  for (double p : {-2.0, -1.5, -0.7, 0.0, 1.25}) {
    const auto fit = fit_power_law(power_law(2.5, p, 1.0, 500.0, 40), 1.0, 500.0);
    EXPECT_NEAR(fit.exponent, p, 1e-12);
    EXPECT_NEAR(fit.log_amplitude, std::log(2.5), 1e-11);
    EXPECT_LT(fit.residual_rms, 1e-12);
    EXPECT_EQ(fit.point_count, 40u);
  }
}

TEST(FitPowerLaw, WindowSelectsPoints) {
  auto s = power_law(1.0, -1.0, 1.0, 100.0, 50);
  s.emplace_back(200.0, 1e6);  // outlier outside the window
  const auto fit = fit_power_law(s, 2.0, 100.0);
  EXPECT_NEAR(fit.exponent, -1.0, 1e-12);
  EXPECT_GE(fit.t_min, 2.0);
  EXPECT_LE(fit.t_max, 100.0);
}

TEST(FitPowerLaw, Errors) {
  EXPECT_THROW(fit_power_law(power_law(1.0, -1.0, 1.0, 10.0, 2), 1.0, 10.0), ConfigError);
  EXPECT_THROW(fit_power_law({{1.0, 1.0}, {2.0, -1.0}, {3.0, 1.0}}, 0.5, 5.0), ConfigError);
  EXPECT_THROW(fit_power_law({{0.0, 1.0}, {2.0, 1.0}, {3.0, 1.0}}, -1.0, 5.0), ConfigError);
}

TEST(SupWeighted, ArgmaxAndTies) {
  const auto s = power_law(1.0, -0.5, 1.0, 100.0, 30);
  EXPECT_DOUBLE_EQ(sup_weighted(s, 0.0).argmax_t, 1.0);
  EXPECT_DOUBLE_EQ(sup_weighted(s, 1.0).argmax_t, 100.0);
  // t^{0.5} t^{-0.5} is flat: the earliest sample wins.
  EXPECT_DOUBLE_EQ(sup_weighted(s, 0.5).argmax_t, 1.0);
  EXPECT_THROW(sup_weighted({}, 0.1), ConfigError);
}

TEST(Targets, Exponents) {
  EXPECT_DOUBLE_EQ(lp_decay_exponent(4.0), -0.75);
  EXPECT_DOUBLE_EQ(lp_decay_exponent(INFINITY), -1.5);
  EXPECT_DOUBLE_EQ(lp_decay_exponent(2.0), 0.0);
  EXPECT_DOUBLE_EQ(lp_decay_exponent(6.0, 1), -1.0 / 3.0);
}

TEST(CompareRate, PassFailFloor) {
  const auto s = power_law(1.0, -2.0, 1.0, 100.0, 30);
  RateTarget t{"x", "convergence", 1.0, 100.0, -2.0, 0.1, 1.0};
  EXPECT_EQ(compare_rate(t, s).status, RateStatus::pass);
  t.target = -3.0;
  EXPECT_EQ(compare_rate(t, s).status, RateStatus::fail);
  t.target = -2.0;
  // everything below the floor
  const auto below = compare_rate(t, s, 10.0);
  EXPECT_EQ(below.status, RateStatus::below_floor);
  EXPECT_EQ(below.excluded_below_floor, 30u);
  // partial floor keeps the early points only
  const auto partial = compare_rate(t, s, 1e-3);
  EXPECT_EQ(partial.status, RateStatus::pass);
  EXPECT_GT(partial.excluded_below_floor, 0u);
  EXPECT_NEAR(partial.fit->exponent, -2.0, 1e-12);
  // empty window
  t.t_min = 200.0;
  t.t_max = 300.0;
  EXPECT_EQ(compare_rate(t, s).status, RateStatus::no_fit);
}

TEST(RateReport, RoutesSeries) {
  ObservableSeries obs;
  obs.columns = {"linf"};
  for (const auto& [t, y] : power_law(1.0, -1.5, 1.0, 100.0, 20)) {
    obs.times.push_back(t);
    obs.rows.push_back({y});
  }
  const std::vector<RateTarget> targets{{"linf", "linf", 1.0, 100.0, -1.5, 0.1, 1.0}};
  const auto out = rate_report(nullptr, &obs, targets);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].status, RateStatus::pass);
  const std::vector<RateTarget> conv{{"c", "convergence", 1.0, 100.0, -2.0, 1.0, 10.0}};
  EXPECT_THROW(rate_report(nullptr, &obs, conv), ConfigError);
}
