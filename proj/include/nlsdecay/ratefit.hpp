#pragma once
// Power-law exponents from measured series, and comparison against target rates.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlsdecay/errors.hpp"

namespace nlsd {

using Sample = std::pair<double, double>;  // (t, y)

struct RateFit {
  double exponent = 0.0;
  double log_amplitude = 0.0;
  double residual_rms = 0.0;
  double t_min = 0.0;
  double t_max = 0.0;
  std::size_t point_count = 0;
  double stderr_exponent = 0.0;
};

/// Least squares of log y against log t over samples with t in [t_min, t_max].
inline RateFit fit_power_law(const std::vector<Sample>& series, double t_min, double t_max) {
  std::vector<double> lx, ly;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& [t, y] : series) {
    if (t < t_min || t > t_max) continue;
    if (!(t > 0.0)) throw ConfigError("power-law fit requires t > 0");
    if (!(y > 0.0)) throw ConfigError("power-law fit requires positive values (got " + std::to_string(y) + ")");
    lx.push_back(std::log(t));
    ly.push_back(std::log(y));
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  const std::size_t n = lx.size();
  if (n < 3) throw ConfigError("power-law fit needs at least 3 points in the window, got " + std::to_string(n));

  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw ConfigError("power-law fit needs distinct t values");

  RateFit fit;
  fit.exponent = sxy / sxx;
  fit.log_amplitude = my - fit.exponent * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (fit.log_amplitude + fit.exponent * lx[i]);
    ssr += r * r;
  }
  fit.residual_rms = std::sqrt(ssr / static_cast<double>(n));
  fit.stderr_exponent = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
  fit.point_count = n;
  fit.t_min = lo;
  fit.t_max = hi;
  return fit;
}

struct WeightedSup {
  double value = 0.0;
  double argmax_t = 0.0;
};

/// max_t t^eps y(t). Values within a relative 1e-12 of the running maximum
/// count as ties, and ties keep the earliest t.
inline WeightedSup sup_weighted(const std::vector<Sample>& series, double eps) {
  if (series.empty()) throw ConfigError("weighted supremum of an empty series");
  WeightedSup best{-std::numeric_limits<double>::infinity(), 0.0};
  for (const auto& [t, y] : series) {
    if (!(t > 0.0)) throw ConfigError("weighted supremum requires t > 0");
    const double v = (eps == 0.0 ? 1.0 : std::pow(t, eps)) * y;
    const double margin = 1e-12 * std::abs(best.value);
    if (!std::isfinite(best.value) || v > best.value + margin) best = {v, t};
  }
  return best;
}

// ---------------------------------------------------------------------------
// Rate targets

/// Target exponent for ||u(t)||_{L^p} in three dimensions: -3 (1/2 - 1/p).
inline double lp_decay_exponent(double p, int dimension = 3) {
  const double inv = std::isinf(p) ? 0.0 : 1.0 / p;
  return -static_cast<double>(dimension) * (0.5 - inv);
}

inline constexpr double kDispersiveExponent = -1.5;
inline constexpr double kConvergenceExponent = -2.0;
inline constexpr double kTailExponent = -0.7;

struct RateTarget {
  std::string name;
  std::string series;  ///< "convergence", "tail", or an observables column
  double t_min = 0.0;
  double t_max = 0.0;
  double target = 0.0;     ///< exponent claimed as an upper bound
  double tolerance = 0.1;  ///< pass when fitted exponent <= target + tolerance
  double floor_factor = 1.0;  ///< convergence only: keep points >= floor_factor * cauchy_gap
};

enum class RateStatus { pass, fail, below_floor, no_fit };

inline std::string to_string(RateStatus s) {
  switch (s) {
    case RateStatus::pass: return "pass";
    case RateStatus::fail: return "fail";
    case RateStatus::below_floor: return "below_floor";
    case RateStatus::no_fit: return "no_fit";
  }
  return "unknown";
}

struct RateComparison {
  RateTarget target;
  RateStatus status = RateStatus::no_fit;
  std::optional<RateFit> fit;
  std::size_t excluded_below_floor = 0;
  std::string message;
};

/// Fits one series against its target. Convergence samples below the floor are
/// dropped; a window with nothing left above the floor reports below_floor.
inline RateComparison compare_rate(const RateTarget& target, const std::vector<Sample>& series,
                                   double floor = 0.0) {
  RateComparison cmp;
  cmp.target = target;
  std::vector<Sample> kept;
  std::size_t in_window = 0;
  for (const auto& s : series) {
    if (s.first < target.t_min || s.first > target.t_max) continue;
    ++in_window;
    if (floor > 0.0 && s.second < target.floor_factor * floor) {
      ++cmp.excluded_below_floor;
      continue;
    }
    kept.push_back(s);
  }
  if (in_window > 0 && kept.empty()) {
    cmp.status = RateStatus::below_floor;
    cmp.message = "window lies entirely below the resolution floor";
    return cmp;
  }
  try {
    cmp.fit = fit_power_law(kept, target.t_min, target.t_max);
  } catch (const ConfigError& e) {
    cmp.status = RateStatus::no_fit;
    cmp.message = e.what();
    return cmp;
  }
  cmp.status = cmp.fit->exponent <= target.target + target.tolerance ? RateStatus::pass : RateStatus::fail;
  return cmp;
}

}  // namespace nlsd
