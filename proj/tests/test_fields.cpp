#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nlsdecay/fields.hpp"
#include "nlsdecay/profiles.hpp"

using namespace nlsd;
using std::numbers::pi;

namespace {

// Closed forms for A exp(-|x|^2 / (2 s^2)) on R^3.
double gauss_lp(double a, double s, double p) { return a * std::pow(2.0 * pi * s * s / p, 1.5 / p); }
double gauss_grad_l2(double a, double s) { return std::sqrt(1.5 * a * a * std::pow(pi, 1.5) * s); }
double gauss_hdot_half(double a, double s) { return std::sqrt(2.0 * pi * a * a * s * s); }

// Simpson rule on [0, kmax] for the radial integral 4 pi int f(k) k^2 dk / (2 pi)^3.
template <class F>
double radial_spectral_integral(F f, double kmax = 40.0, int n = 40000) {
  const double h = kmax / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double k = i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * f(k) * k * k;
  }
  return 4.0 * pi * acc * h / 3.0 / std::pow(2.0 * pi, 3);
}

Field radial_gaussian(double amp, double sigma, std::size_t n = 2048, double radius = 40.0) {
  auto grid = make_grid(make_geometry(1, {n}, {radius}, Mode::radial_3d));
  return make_base({amp, sigma}, grid);
}

Field periodic_gaussian_3d(double amp, double sigma) {
  auto grid = make_grid(make_geometry(3, {64, 64, 64}, {16.0, 16.0, 16.0}));
  return make_base({amp, sigma}, grid);
}

}  // namespace

TEST(Field, ConstructorValidatesSize) {
  auto grid = make_grid(make_geometry(1, {16}, {1.0}));
  EXPECT_THROW(Field(grid, 0.0, std::vector<cplx>(8)), ConfigError);
  EXPECT_NO_THROW(Field(grid, 0.0, std::vector<cplx>(16)));
}

TEST(Field, ArithmeticRequiresSameGeometry) {
  auto a = Field::zeros(make_grid(make_geometry(1, {16}, {1.0})));
  auto b = Field::zeros(make_grid(make_geometry(1, {16}, {2.0})));
  EXPECT_THROW(a += b, ConfigError);
}

TEST(Norms, RadialGaussianMatchesClosedForms) {
  const double amp = 1.3, sigma = 1.1;
  const auto f = radial_gaussian(amp, sigma);
  EXPECT_NEAR(norm_l2(f), gauss_lp(amp, sigma, 2.0), 1e-10);
  EXPECT_NEAR(norm_lp(f, 4.0), gauss_lp(amp, sigma, 4.0), 1e-10);
  EXPECT_NEAR(norm_lp(f, 1.0), gauss_lp(amp, sigma, 1.0), 1e-9);
  EXPECT_NEAR(norm_lp(f, 5.0), gauss_lp(amp, sigma, 5.0), 1e-10);
  EXPECT_NEAR(norm_linf(f), amp, 1e-10);
  EXPECT_NEAR(norm_hdot(f, 1.0), gauss_grad_l2(amp, sigma), 1e-9);
  // The |k| weight is not smooth at k = 0, so the discrete sum converges like (pi/R)^4: use a wider box.
  EXPECT_NEAR(norm_hdot(radial_gaussian(amp, sigma, 8192, 160.0), 0.5), gauss_hdot_half(amp, sigma), 1e-8);
}

TEST(Norms, PeriodicGaussianMatchesRadial) {
  const auto p = periodic_gaussian_3d(1.0, 1.0);
  const auto r = radial_gaussian(1.0, 1.0);
  EXPECT_NEAR(norm_l2(p), norm_l2(r), 1e-9);
  EXPECT_NEAR(norm_lp(p, 4.0), norm_lp(r, 4.0), 1e-9);
  EXPECT_NEAR(norm_linf(p), 1.0, 1e-12);
  EXPECT_NEAR(norm_hdot(p, 1.0), norm_hdot(r, 1.0), 1e-8);
  EXPECT_NEAR(energy(p), energy(r), 1e-8);
}

TEST(Norms, LpInsensitiveToBoxDoubling) {
  auto small = make_grid(make_geometry(1, {512}, {20.0}, Mode::radial_3d));
  auto big = make_grid(make_geometry(1, {1024}, {40.0}, Mode::radial_3d));
  const auto a = make_base({1.0, 1.0}, small);
  const auto b = make_base({1.0, 1.0}, big);
  for (double p : {2.0, 3.0, 4.0, 6.0})
    EXPECT_NEAR(norm_lp(a, p) / norm_lp(b, p), 1.0, 1e-6) << p;
}

TEST(Norms, RejectsInvalidOrders) {
  const auto f = radial_gaussian(1.0, 1.0, 256, 20.0);
  EXPECT_THROW(norm_lp(f, 0.5), ConfigError);
  EXPECT_THROW(norm_hdot(f, -1.0), ConfigError);
}

TEST(Energy, SingleModeClosedForm) {
  const double len = 2.0 * pi, amp = 0.7, k0 = 3.0;
  auto grid = make_grid(make_geometry(1, {64}, {len}));
  std::vector<cplx> v(64);
  const auto x = grid->coordinates(0);
  for (std::size_t j = 0; j < 64; ++j) v[j] = amp * std::polar(1.0, k0 * x[j]);
  const Field f(grid, 0.0, v);
  const double vol = len;
  EXPECT_NEAR(energy(f), 0.5 * amp * amp * k0 * k0 * vol + 0.25 * std::pow(amp, 4) * vol, 1e-12);
  EXPECT_NEAR(mass(f), amp * amp * vol, 1e-12);
}

TEST(Sobolev, ZeroModeConvention) {
  auto grid = make_grid(make_geometry(1, {16}, {2.0}));
  const Field c(grid, 0.0, std::vector<cplx>(16, cplx(2.0, 0.0)));
  EXPECT_NEAR(norm_hdot(c, 0.0), norm_l2(c), 1e-13);
  EXPECT_EQ(norm_hdot(c, 0.5), 0.0);
  EXPECT_EQ(norm_hdot(c, 1.0), 0.0);
  EXPECT_NEAR(norm_h(c, 4.0), norm_l2(c), 1e-13);
}

TEST(NormReport, InternalConsistency) {
  const auto r = norm_report(radial_gaussian(1.0, 1.5));
  EXPECT_LE(r.linf, r.l2 * 1e6);
  EXPECT_NEAR(r.energy, 0.5 * r.hdot1 * r.hdot1 + 0.25 * std::pow(r.l4, 4), 1e-12);
  EXPECT_GE(r.h4, r.l2);
  // Holder: ||f||_4^2 <= ||f||_2 ||f||_inf
  EXPECT_LE(r.l4 * r.l4, r.l2 * r.linf * (1 + 1e-12));
  // Interpolation: ||f||_{Hdot^{1/2}}^2 <= ||f||_2 ||f||_{Hdot^1}
  EXPECT_LE(r.hdot_half * r.hdot_half, r.l2 * r.hdot1 * (1 + 1e-12));
}

TEST(Interpolation, ExponentsSumToOne) {
  EXPECT_DOUBLE_EQ(kInterpL2Exponent + kInterpGradExponent + kInterpH4Exponent, 1.0);
}

TEST(Interpolation, ZeroFieldIsSatisfied) {
  auto grid = make_grid(make_geometry(3, {8, 8, 8}, {4.0, 4.0, 4.0}));
  const auto c = interpolation_check(Field::zeros(grid));
  EXPECT_EQ(c.lhs, 0.0);
  EXPECT_EQ(c.rhs, 0.0);
  EXPECT_TRUE(c.satisfied);
}

TEST(Interpolation, GaussianAgainstQuadratureOracle) {
  // Spectrum of exp(-|x|^2/2): (2 pi)^{3/2} exp(-|k|^2/2).
  auto fhat2 = [](double k) { return std::pow(2.0 * pi, 3) * std::exp(-k * k); };
  const double a1 = std::sqrt(radial_spectral_integral(fhat2));
  const double a2 = std::sqrt(radial_spectral_integral([&](double k) { return k * k * fhat2(k); }));
  const double b = std::sqrt(radial_spectral_integral([&](double k) { return (1.0 + std::pow(k, 8)) * fhat2(k); }));
  const double rhs = std::pow(a1, 0.4) * std::pow(a2, 0.24) * std::pow(b, 0.36);

  const auto c = interpolation_check(radial_gaussian(1.0, 1.0));
  EXPECT_NEAR(c.lhs, 1.0, 1e-10);
  EXPECT_NEAR(c.a1, a1, 1e-8 * a1);
  EXPECT_NEAR(c.a2, a2, 1e-8 * a2);
  EXPECT_NEAR(c.b, b, 1e-7 * b);
  EXPECT_NEAR(c.rhs, rhs, 1e-7 * rhs);
  EXPECT_TRUE(c.satisfied);
}

TEST(Radial, OriginExtrapolation) {
  const auto f = radial_gaussian(0.8, 1.0, 1024, 20.0);
  EXPECT_NEAR(std::abs(value_at_origin(f)), 0.8, 1e-10);
}
