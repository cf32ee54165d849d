#pragma once
// Field values and the norms measured on them.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <vector>

#include "nlsdecay/errors.hpp"
#include "nlsdecay/grid.hpp"

namespace nlsd {

/// Complex samples on a grid at a time stamp. In radial-3d mode the samples
/// hold v = r u; every norm below is reported for the 3D field u.
struct Field {
  GridPtr grid;
  double time = 0.0;
  std::vector<cplx> values;

  Field() = default;
  Field(GridPtr g, double t, std::vector<cplx> v) : grid(std::move(g)), time(t), values(std::move(v)) {
    if (!grid) throw ConfigError("field requires a grid");
    if (values.size() != grid->size())
      throw ConfigError("field has " + std::to_string(values.size()) + " samples, geometry expects " +
                        std::to_string(grid->size()));
  }

  static Field zeros(GridPtr g, double t = 0.0) {
    const auto n = g->size();
    return Field(std::move(g), t, std::vector<cplx>(n));
  }

  [[nodiscard]] std::size_t size() const { return values.size(); }
  [[nodiscard]] const Geometry& geometry() const { return grid->geometry(); }

  [[nodiscard]] bool all_finite() const {
    return std::all_of(values.begin(), values.end(),
                       [](const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
  }

  Field& operator+=(const Field& o) {
    check_compatible(o);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    return *this;
  }
  Field& operator-=(const Field& o) {
    check_compatible(o);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
    return *this;
  }
  Field& operator*=(cplx c) {
    for (auto& z : values) z *= c;
    return *this;
  }

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(Field a, cplx c) { return a *= c; }
  friend Field operator*(cplx c, Field a) { return a *= c; }

 private:
  void check_compatible(const Field& o) const {
    if (grid != o.grid && !(grid && o.grid && grid->geometry() == o.grid->geometry()))
      throw ConfigError("fields live on different geometries");
  }
};

/// Throws NumericError when any sample is NaN or infinite.
inline void require_finite(const Field& f, const char* where) {
  if (!f.all_finite()) throw NumericError(std::string("non-finite samples detected in ") + where);
}

namespace detail {

// Even extrapolation of u(r) to r = 0 through the first six samples,
// polynomial in r^2 (Lagrange weights for nodes s_j = r_j^2 evaluated at 0).
inline cplx radial_origin_value(const Field& f) {
  constexpr int kNodes = 6;
  const auto r = f.grid->coordinates(0);
  std::array<double, kNodes> s{};
  for (int j = 0; j < kNodes; ++j) s[j] = r[j] * r[j];
  cplx acc{};
  for (int i = 0; i < kNodes; ++i) {
    double w = 1.0;
    for (int j = 0; j < kNodes; ++j) {
      if (j != i) w *= s[j] / (s[j] - s[i]);
    }
    acc += w * (f.values[i] / r[i]);
  }
  return acc;
}

}  // namespace detail

/// Pointwise u samples (radial: v / r).
inline std::vector<cplx> physical_values(const Field& f) {
  if (!f.grid->radial()) return f.values;
  const auto r = f.grid->coordinates(0);
  std::vector<cplx> u(f.values.size());
  for (std::size_t j = 0; j < u.size(); ++j) u[j] = f.values[j] / r[j];
  return u;
}

/// Value of u at the origin (radial: extrapolated limit).
inline cplx value_at_origin(const Field& f) {
  if (f.grid->radial()) return detail::radial_origin_value(f);
  // Periodic grids sample the origin at index N/2 on every axis.
  const auto& g = f.geometry();
  std::size_t flat = 0;
  for (auto n : g.sizes) flat = flat * n + n / 2;
  return f.values[flat];
}

inline double norm_linf(const Field& f) {
  double m2 = 0.0;
  if (f.grid->radial()) {
    const auto r2 = f.grid->radius2();
    for (std::size_t j = 0; j < f.values.size(); ++j) m2 = std::max(m2, std::norm(f.values[j]) / r2[j]);
    m2 = std::max(m2, std::norm(detail::radial_origin_value(f)));
  } else {
    for (const auto& z : f.values) m2 = std::max(m2, std::norm(z));
  }
  return std::sqrt(m2);
}

/// L^p norm of u by grid quadrature; p = infinity gives the peak modulus.
inline double norm_lp(const Field& f, double p) {
  if (!(p >= 1.0)) throw ConfigError("L^p norm requires p >= 1");
  if (std::isinf(p)) return norm_linf(f);
  const auto w = f.grid->quadrature_weights();
  const bool radial = f.grid->radial();
  const auto r2 = f.grid->radius2();
  const double half_p = 0.5 * p;
  double acc = 0.0;
  for (std::size_t j = 0; j < f.values.size(); ++j) {
    double a2 = std::norm(f.values[j]);
    if (radial) a2 /= r2[j];
    if (a2 == 0.0) continue;
    if (p == 2.0) acc += w[j] * a2;
    else if (p == 4.0) acc += w[j] * a2 * a2;
    else acc += w[j] * std::pow(a2, half_p);
  }
  return std::pow(acc, 1.0 / p);
}

inline double norm_l2(const Field& f) { return norm_lp(f, 2.0); }

/// Spectral coefficients of the stored samples.
inline std::vector<cplx> spectrum(const Field& f) { return transform_forward(f.values, *f.grid); }

namespace detail {
inline double weighted_spectral_sum(const Grid& grid, std::span<const cplx> coef, std::span<const double> weight) {
  const auto mw = grid.spectral_weights();
  double acc = 0.0;
  for (std::size_t i = 0; i < coef.size(); ++i) acc += mw[i] * weight[i] * std::norm(coef[i]);
  return acc;
}
}  // namespace detail

/// Sobolev norm: homogeneous uses |k|^{2s}, inhomogeneous uses 1 + |k|^{2s}.
inline double norm_sobolev(const Field& f, double s, bool homogeneous) {
  if (!(s >= 0.0)) throw ConfigError("Sobolev order must be nonnegative");
  const auto coef = spectrum(f);
  auto w = f.grid->k_power(s);
  if (!homogeneous) {
    for (auto& x : w) x += 1.0;
  }
  return std::sqrt(f.grid->spectral_measure() * detail::weighted_spectral_sum(*f.grid, coef, w));
}

inline double norm_hdot(const Field& f, double s) { return norm_sobolev(f, s, true); }
inline double norm_h(const Field& f, double s) { return norm_sobolev(f, s, false); }

/// 1/2 ||grad u||_2^2 + 1/4 ||u||_4^4, gradient taken spectrally.
inline double energy(const Field& f) {
  const auto coef = spectrum(f);
  const double grad2 = f.grid->spectral_measure() * detail::weighted_spectral_sum(*f.grid, coef, f.grid->k2());
  const double l4 = norm_lp(f, 4.0);
  return 0.5 * grad2 + 0.25 * l4 * l4 * l4 * l4;
}

/// Mass ||u||_2^2.
inline double mass(const Field& f) {
  const double l2 = norm_l2(f);
  return l2 * l2;
}

struct NormReport {
  double l1 = 0.0;
  double l2 = 0.0;
  double l4 = 0.0;
  double linf = 0.0;
  double hdot_half = 0.0;
  double hdot1 = 0.0;
  double h4 = 0.0;
  double energy = 0.0;
};

inline NormReport norm_report(const Field& f) {
  NormReport r;
  r.l1 = norm_lp(f, 1.0);
  r.l2 = norm_l2(f);
  r.l4 = norm_lp(f, 4.0);
  r.linf = norm_linf(f);
  const auto coef = spectrum(f);
  const double meas = f.grid->spectral_measure();
  r.hdot_half = std::sqrt(meas * detail::weighted_spectral_sum(*f.grid, coef, f.grid->k_power(0.5)));
  r.hdot1 = std::sqrt(meas * detail::weighted_spectral_sum(*f.grid, coef, f.grid->k_power(1.0)));
  auto w4 = f.grid->k_power(4.0);
  for (auto& x : w4) x += 1.0;
  r.h4 = std::sqrt(meas * detail::weighted_spectral_sum(*f.grid, coef, w4));
  r.energy = 0.5 * r.hdot1 * r.hdot1 + 0.25 * std::pow(r.l4, 4);
  return r;
}

// Exponents of the L^infinity interpolation bound ||f||_inf <= a1^{2/5} a2^{6/25} b^{9/25}.
inline constexpr double kInterpL2Exponent = 2.0 / 5.0;
inline constexpr double kInterpGradExponent = 6.0 / 25.0;
inline constexpr double kInterpH4Exponent = 9.0 / 25.0;
static_assert(kInterpL2Exponent + kInterpGradExponent + kInterpH4Exponent > 1.0 - 1e-15 &&
              kInterpL2Exponent + kInterpGradExponent + kInterpH4Exponent < 1.0 + 1e-15);

struct InterpolationCheck {
  double lhs = 0.0;  ///< ||f||_inf
  double rhs = 0.0;  ///< a1^{2/5} a2^{6/25} b^{9/25}
  double a1 = 0.0;
  double a2 = 0.0;
  double b = 0.0;
  bool satisfied = true;

  /// lhs / rhs, the factor by which the bound is exceeded (<= 1 when satisfied).
  [[nodiscard]] double ratio() const { return rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? INFINITY : 0.0); }
};

/// Compares ||f||_inf against the L^2 / gradient / H^4 interpolation bound,
/// with H^4 measured by the (1 + |k|^8)^{1/2} multiplier.
inline InterpolationCheck interpolation_check(const Field& f) {
  InterpolationCheck c;
  const auto coef = spectrum(f);
  const double meas = f.grid->spectral_measure();
  c.a1 = std::sqrt(meas * detail::weighted_spectral_sum(*f.grid, coef, f.grid->k_power(0.0)));
  c.a2 = std::sqrt(meas * detail::weighted_spectral_sum(*f.grid, coef, f.grid->k_power(1.0)));
  auto w4 = f.grid->k_power(4.0);
  for (auto& x : w4) x += 1.0;
  c.b = std::sqrt(meas * detail::weighted_spectral_sum(*f.grid, coef, w4));
  c.lhs = norm_linf(f);
  c.rhs = std::pow(c.a1, kInterpL2Exponent) * std::pow(c.a2, kInterpGradExponent) * std::pow(c.b, kInterpH4Exponent);
  c.satisfied = c.lhs <= c.rhs * (1.0 + 1e-9);
  return c;
}

}  // namespace nlsd
