#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "nlsdecay/log.hpp"
#include "nlsdecay/profiles.hpp"

using namespace nlsd;

namespace {
GridPtr radial_grid(std::size_t n = 2048, double radius = 200.0) {
  return make_grid(make_geometry(1, {n}, {radius}, Mode::radial_3d));
}
}  // namespace

TEST(Profiles, InverseSquareWeights) {
  const auto b = inverse_square_bubbles({10.0, 100.0, 1000.0});
  ASSERT_EQ(b.size(), 3u);
  EXPECT_DOUBLE_EQ(b[1].weight, 0.25);
  EXPECT_DOUBLE_EQ(b[2].weight, 1.0 / 9.0);
  EXPECT_DOUBLE_EQ(b[2].delay, 1000.0);
  const auto d = decade_bubbles(2);
  EXPECT_DOUBLE_EQ(d[0].delay, 10.0);
  EXPECT_DOUBLE_EQ(d[1].delay, 100.0);
}

TEST(Profiles, BubbleRefocusesAtItsDelay) {
  ScopedWarningCapture quiet;
  auto grid = radial_grid();
  const auto phi = make_base({1.0, 1.0}, grid);
  const auto bubble = build_bubble(phi, 0.5, 12.0);
  auto back = free_propagate(bubble, 12.0);
  back *= 2.0;
  EXPECT_LT(norm_l2(back - phi), 1e-12);
  EXPECT_NEAR(norm_linf(bubble), 0.5 * std::pow(1.0 + 4.0 * 144.0, -0.75), 1e-10);
}

TEST(Profiles, DecompositionSumsToProfile) {
  ScopedWarningCapture quiet;
  auto grid = radial_grid();
  ProfileSpec spec;
  spec.geometry = grid->geometry();
  spec.bubbles = inverse_square_bubbles({5.0, 20.0, 40.0});
  const auto u0 = build_profile(spec, grid);
  for (std::size_t n = 1; n <= 3; ++n) {
    const auto d = decompose_profile(spec, n, grid);
    EXPECT_LT(norm_l2(d.below + d.above - u0), 1e-13) << n;
  }
  const auto d2 = decompose_profile(spec, 2, grid);
  const auto only2 = build_bubble(make_base(spec.base, grid), 0.25, 20.0);
  EXPECT_LT(norm_l2(d2.at - only2), 1e-14);
  EXPECT_THROW(decompose_profile(spec, 0, grid), ConfigError);
  EXPECT_THROW(decompose_profile(spec, 4, grid), ConfigError);
}

TEST(Profiles, EmptyBubbleListGivesZero) {
  auto grid = radial_grid(256, 40.0);
  ProfileSpec spec;
  spec.geometry = grid->geometry();
  EXPECT_EQ(norm_l2(build_profile(spec, grid)), 0.0);
}

TEST(Profiles, ResolutionAndContainmentChecks) {
  auto coarse = make_grid(make_geometry(1, {64}, {64.0}, Mode::radial_3d));  // spacing 1
  EXPECT_THROW(make_base({1.0, 1.0}, coarse), ConfigError);
  auto tiny = make_grid(make_geometry(1, {1024}, {4.0}, Mode::radial_3d));
  EXPECT_THROW(make_base({1.0, 1.0}, tiny), ConfigError);
}

TEST(Profiles, SpecValidation) {
  ProfileSpec spec;
  spec.bubbles = {{1.0, 10.0}, {0.5, 5.0}};
  EXPECT_THROW(spec.validate(), ConfigError);
  spec.bubbles = {{-1.0, 10.0}};
  EXPECT_THROW(spec.validate(), ConfigError);
  spec.bubbles = {{1.0, -1.0}};
  EXPECT_THROW(spec.validate(), ConfigError);
}

TEST(Profiles, SpreadingWarning) {
  std::vector<std::string> messages;
  ScopedWarningCapture capture([&](const std::string& m) { messages.push_back(m); });
  auto grid = radial_grid(512, 40.0);
  const auto phi = make_base({1.0, 1.0}, grid);
  EXPECT_TRUE(check_spreading(phi, 0.5, "short"));
  EXPECT_TRUE(messages.empty());
  EXPECT_FALSE(check_spreading(phi, 50.0, "long"));
  ASSERT_EQ(messages.size(), 1u);
  EXPECT_NE(messages[0].find("long"), std::string::npos);
}
