#pragma once
// Initial data built from backward-scattered copies of a base bump:
//   u0 = sum_n c_n exp(-i a_n Lap) phi.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "nlsdecay/errors.hpp"
#include "nlsdecay/fields.hpp"
#include "nlsdecay/log.hpp"
#include "nlsdecay/propagate.hpp"

namespace nlsd {

struct GaussianBase {
  double amplitude = 1.0;
  double width = 1.0;  ///< sigma in exp(-|x|^2 / (2 sigma^2))
};

struct Bubble {
  double weight = 1.0;  ///< c_n
  double delay = 0.0;   ///< a_n, the refocusing time
};

struct ProfileSpec {
  GaussianBase base;
  std::vector<Bubble> bubbles;
  Geometry geometry;

  void validate() const {
    for (std::size_t i = 0; i < bubbles.size(); ++i) {
      if (!(bubbles[i].weight > 0.0) || !std::isfinite(bubbles[i].weight))
        throw ConfigError("bubble weights must be positive");
      if (!(bubbles[i].delay >= 0.0) || !std::isfinite(bubbles[i].delay))
        throw ConfigError("bubble delays must be nonnegative");
      if (i > 0 && !(bubbles[i].delay > bubbles[i - 1].delay))
        throw ConfigError("bubble delays must be strictly increasing");
    }
  }
};

/// Weights 1/n^2 for n = 1..delays.size(), paired with the given delays.
inline std::vector<Bubble> inverse_square_bubbles(const std::vector<double>& delays) {
  std::vector<Bubble> out;
  out.reserve(delays.size());
  for (std::size_t i = 0; i < delays.size(); ++i) {
    const double n = static_cast<double>(i + 1);
    out.push_back({1.0 / (n * n), delays[i]});
  }
  return out;
}

/// Weights 1/n^2 and delays 10^n, n = 1..count.
inline std::vector<Bubble> decade_bubbles(std::size_t count) {
  std::vector<double> delays;
  for (std::size_t i = 1; i <= count; ++i) delays.push_back(std::pow(10.0, static_cast<double>(i)));
  return inverse_square_bubbles(delays);
}

/// The base bump phi at time 0, centred at the origin.
inline Field make_base(const GaussianBase& base, GridPtr grid) {
  const auto& geom = grid->geometry();
  if (!(base.width > 0.0)) throw ConfigError("Gaussian width must be positive");
  if (base.width < 4.0 * geom.max_spacing()) {
    std::ostringstream os;
    os << "Gaussian width " << base.width << " is under-resolved (needs >= 4 x spacing " << geom.max_spacing()
       << ")";
    throw ConfigError(os.str());
  }
  if (base.width > geom.min_length() / 8.0) {
    std::ostringstream os;
    os << "Gaussian width " << base.width << " is not contained (needs <= extent/8 = " << geom.min_length() / 8.0
       << ")";
    throw ConfigError(os.str());
  }
  const auto r2 = grid->radius2();
  std::vector<cplx> v(grid->size());
  const double inv = 1.0 / (2.0 * base.width * base.width);
  for (std::size_t j = 0; j < v.size(); ++j) {
    double val = base.amplitude * std::exp(-r2[j] * inv);
    if (grid->radial()) val *= std::sqrt(r2[j]);
    v[j] = val;
  }
  return Field(std::move(grid), 0.0, std::move(v));
}

/// Root-mean-square radius sqrt(int |x|^2 |u|^2 / int |u|^2).
inline double rms_radius(const Field& f) {
  const auto w = f.grid->quadrature_weights();
  const auto r2 = f.grid->radius2();
  const auto u = physical_values(f);
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double a = std::norm(u[j]) * w[j];
    num += a * r2[j];
    den += a;
  }
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

/// Wavenumber below which all but `fraction` of the spectral L^2 mass sits.
inline double effective_bandwidth(const Field& f, double fraction = 1e-6) {
  const auto coef = spectrum(f);
  const auto k2 = f.grid->k2();
  std::vector<std::pair<double, double>> modes(coef.size());
  double total = 0.0;
  for (std::size_t i = 0; i < coef.size(); ++i) {
    modes[i] = {k2[i], std::norm(coef[i])};
    total += modes[i].second;
  }
  if (total == 0.0) return 0.0;
  std::sort(modes.begin(), modes.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  double tail = 0.0;
  for (const auto& [k2v, e] : modes) {
    tail += e;
    if (tail > fraction * total) return std::sqrt(k2v);
  }
  return 0.0;
}

/// Estimated radius reached by the free evolution of f after |t|: sigma + 2 k_max |t|.
inline double spreading_radius(const Field& f, double t) {
  return rms_radius(f) + 2.0 * effective_bandwidth(f) * std::abs(t);
}

/// Warns when free evolution over |t| is expected to reach the domain boundary.
inline bool check_spreading(const Field& f, double t, const std::string& what) {
  const double radius = spreading_radius(f, t);
  const double limit = 0.5 * f.geometry().min_length();
  if (radius > limit) {
    std::ostringstream os;
    os << what << ": spreading radius " << radius << " after t = " << t << " exceeds half the extent (" << limit
       << "); boundary effects expected";
    warn(os.str());
    return false;
  }
  return true;
}

/// c exp(-i a Lap) phi: a copy of phi that refocuses at time a.
inline Field build_bubble(const Field& phi, double weight, double delay) {
  if (!(delay >= 0.0)) throw ConfigError("bubble delay must be nonnegative");
  check_spreading(phi, delay, "bubble with delay " + std::to_string(delay));
  Field out = free_propagate(phi, -delay);
  out *= weight;
  out.time = phi.time;
  return out;
}

namespace detail {
inline Field sum_bubbles(const Field& phi, std::span<const Bubble> bubbles) {
  Field acc = Field::zeros(phi.grid, phi.time);
  for (const auto& b : bubbles) acc += build_bubble(phi, b.weight, b.delay);
  return acc;
}
}  // namespace detail

inline Field build_profile(const ProfileSpec& spec, GridPtr grid) {
  spec.validate();
  if (!(grid->geometry() == spec.geometry)) throw ConfigError("profile geometry does not match grid");
  const Field phi = make_base(spec.base, grid);
  return detail::sum_bubbles(phi, spec.bubbles);
}

inline Field build_profile(const ProfileSpec& spec) { return build_profile(spec, make_grid(spec.geometry)); }

struct ProfileDecomposition {
  Field below;  ///< bubbles 1..N
  Field at;     ///< bubble N
  Field above;  ///< bubbles N+1..
};

/// Split of the profile at bubble N (1-based).
inline ProfileDecomposition decompose_profile(const ProfileSpec& spec, std::size_t n, GridPtr grid) {
  spec.validate();
  if (n < 1 || n > spec.bubbles.size())
    throw ConfigError("decomposition index " + std::to_string(n) + " outside 1.." +
                      std::to_string(spec.bubbles.size()));
  const Field phi = make_base(spec.base, grid);
  std::span<const Bubble> all(spec.bubbles);
  ProfileDecomposition d;
  d.below = detail::sum_bubbles(phi, all.first(n));
  d.at = build_bubble(phi, spec.bubbles[n - 1].weight, spec.bubbles[n - 1].delay);
  d.above = detail::sum_bubbles(phi, all.subspan(n));
  return d;
}

inline ProfileDecomposition decompose_profile(const ProfileSpec& spec, std::size_t n) {
  return decompose_profile(spec, n, make_grid(spec.geometry));
}

}  // namespace nlsd
