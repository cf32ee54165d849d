#pragma once
// Discrete geometries, wavenumber lattices and the spectral transform pair.
//
// Two layouts are supported:
//   * periodic-cartesian: a box [-L/2, L/2)^d sampled at N points per axis.
//     Coefficients follow u_hat(k) = (1/N) sum_j u(x_j) exp(-i k x_j), so a
//     single mode exp(i k0 x) maps to exactly 1 at k0.
//   * radial-3d: a ball of radius R holding v(r) = r u(r) on the cell
//     midpoints r_j = (j + 1/2) R / N, j = 0..N-1 (Dirichlet at r = 0 and
//     r = R). Coefficients follow v(r_j) = sum_{m=1..N} b_m sin(k_m r_j),
//     k_m = m pi / R (a DST-II / DST-III pair). The top mode m = N samples
//     as (-1)^j and carries twice the discrete norm of the others; see
//     spectral_weights().
// Both forward maps carry the 1/N-type factor; inverse maps carry none.

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "nlsdecay/errors.hpp"

namespace nlsd {

using cplx = std::complex<double>;

enum class Mode { periodic_cartesian, radial_3d };

inline std::string to_string(Mode m) {
  return m == Mode::periodic_cartesian ? "periodic-cartesian" : "radial-3d";
}

inline Mode mode_from_string(const std::string& s) {
  if (s == "periodic-cartesian" || s == "periodic") return Mode::periodic_cartesian;
  if (s == "radial-3d" || s == "radial") return Mode::radial_3d;
  throw ConfigError("unknown geometry mode '" + s + "'");
}

struct Geometry {
  int dimension = 1;
  std::vector<std::size_t> sizes;
  std::vector<double> lengths;
  Mode mode = Mode::periodic_cartesian;

  [[nodiscard]] std::size_t total() const {
    std::size_t n = 1;
    for (auto s : sizes) n *= s;
    return n;
  }

  /// Sample spacing along an axis.
  [[nodiscard]] double spacing(std::size_t axis) const {
    return lengths[axis] / static_cast<double>(sizes[axis]);
  }

  [[nodiscard]] double max_spacing() const {
    double h = 0.0;
    for (std::size_t a = 0; a < sizes.size(); ++a) h = std::max(h, spacing(a));
    return h;
  }

  [[nodiscard]] double min_length() const {
    double l = lengths.front();
    for (double x : lengths) l = std::min(l, x);
    return l;
  }

  /// Physical dimension of the underlying problem (radial-3d is 3D).
  [[nodiscard]] int physical_dimension() const { return mode == Mode::radial_3d ? 3 : dimension; }

  bool operator==(const Geometry&) const = default;
};

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline Geometry make_geometry(int dimension, std::vector<std::size_t> sizes, std::vector<double> lengths,
                              Mode mode = Mode::periodic_cartesian) {
  if (dimension < 1 || dimension > 3) throw ConfigError("dimension must be 1, 2 or 3");
  if (mode == Mode::radial_3d && dimension != 1) throw ConfigError("radial-3d geometry must have exactly one axis");
  if (sizes.size() != static_cast<std::size_t>(dimension) || lengths.size() != static_cast<std::size_t>(dimension))
    throw ConfigError("sizes and lengths must have one entry per axis");
  for (auto n : sizes) {
    if (n < 8 || !is_power_of_two(n))
      throw ConfigError("axis size " + std::to_string(n) + " is not a power of two >= 8");
  }
  for (double l : lengths) {
    if (!(l > 0.0) || !std::isfinite(l)) throw ConfigError("axis extents must be strictly positive");
  }
  return Geometry{dimension, std::move(sizes), std::move(lengths), mode};
}

namespace detail {
// The FFTW planner is not re-entrant; execution on distinct arrays is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    if (p == nullptr) return;
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(p);
  }
};
using PlanHandle = std::unique_ptr<fftw_plan_s, PlanDeleter>;
}  // namespace detail

/// Geometry plus its wavenumber tables and transform plans. Immutable and
/// shareable across threads once built; obtain one through make_grid().
class Grid {
 public:
  explicit Grid(Geometry geom) : geom_(std::move(geom)) {
    build_lattice();
    build_plans();
  }

  Grid(const Grid&) = delete;
  Grid& operator=(const Grid&) = delete;

  [[nodiscard]] const Geometry& geometry() const { return geom_; }
  [[nodiscard]] Mode mode() const { return geom_.mode; }
  [[nodiscard]] bool radial() const { return geom_.mode == Mode::radial_3d; }
  [[nodiscard]] std::size_t size() const { return k2_.size(); }

  /// |k|^2 per spectral index, in the transform's native layout.
  [[nodiscard]] std::span<const double> k2() const { return k2_; }

  /// Signed wavenumbers of one axis, native layout.
  [[nodiscard]] std::span<const double> wavenumbers(std::size_t axis) const { return axis_k_[axis]; }

  /// Sample coordinates of one axis (radial: r_j).
  [[nodiscard]] std::span<const double> coordinates(std::size_t axis) const { return axis_x_[axis]; }

  /// |x|^2 per sample (radial: r_j^2).
  [[nodiscard]] std::span<const double> radius2() const { return r2_; }

  /// |k|^{2s}; the zero mode is 0 for s > 0 and 1 for s == 0.
  [[nodiscard]] std::vector<double> k_power(double s) const {
    if (s < 0.0) throw ConfigError("multiplier order must be nonnegative");
    std::vector<double> out(k2_.size());
    for (std::size_t i = 0; i < k2_.size(); ++i) {
      if (s == 0.0) {
        out[i] = 1.0;
      } else if (s == 1.0) {
        out[i] = k2_[i];
      } else {
        out[i] = k2_[i] == 0.0 ? 0.0 : std::pow(k2_[i], s);
      }
    }
    return out;
  }

  /// Largest |k| represented on the lattice.
  [[nodiscard]] double k_max() const { return k_max_; }

  /// Per-mode factor in the discrete Parseval identity (1 except the radial top mode).
  [[nodiscard]] std::span<const double> spectral_weights() const { return mode_weight_; }

  /// 1 for retained modes under the 2/3 rule, 0 for truncated ones.
  [[nodiscard]] std::span<const double> dealias_mask() const { return dealias_; }

  /// Physical-space quadrature weight per sample for integrands written in u.
  /// Radial: 4 pi r_j^2 h (u = v / r); periodic: cell volume.
  [[nodiscard]] std::span<const double> quadrature_weights() const { return weights_; }

  /// Factor turning sum |coef|^2 into the continuum L^2 norm squared.
  [[nodiscard]] double spectral_measure() const { return spectral_measure_; }

  [[nodiscard]] double volume() const {
    if (radial()) return 4.0 / 3.0 * std::numbers::pi * std::pow(geom_.lengths[0], 3);
    double v = 1.0;
    for (double l : geom_.lengths) v *= l;
    return v;
  }

  /// In-place forward transform (physical -> spectral coefficients).
  void forward(std::span<cplx> data) const {
    check_size(data.size());
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    if (radial()) {
      fftw_execute_r2r(plan_.get(), reinterpret_cast<double*>(p), reinterpret_cast<double*>(p));
      const double scale = 1.0 / static_cast<double>(data.size());
      for (auto& c : data) c *= scale;
      data.back() *= 0.5;
    } else {
      fftw_execute_dft(plan_.get(), p, p);
      const double scale = 1.0 / static_cast<double>(data.size());
      for (std::size_t i = 0; i < data.size(); ++i) data[i] *= scale * shift_sign_[i];
    }
  }

  /// In-place inverse transform (spectral coefficients -> physical).
  void inverse(std::span<cplx> data) const {
    check_size(data.size());
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    if (radial()) {
      for (auto& c : data) c *= 0.5;
      data.back() *= 2.0;
      fftw_execute_r2r(iplan_.get(), reinterpret_cast<double*>(p), reinterpret_cast<double*>(p));
    } else {
      for (std::size_t i = 0; i < data.size(); ++i) data[i] *= shift_sign_[i];
      fftw_execute_dft(iplan_.get(), p, p);
    }
  }

 private:
  void check_size(std::size_t n) const {
    if (n != k2_.size())
      throw ConfigError("sample count " + std::to_string(n) + " does not match geometry (" +
                        std::to_string(k2_.size()) + ")");
  }

  void build_lattice() {
    const std::size_t total = geom_.total();
    const auto naxes = geom_.sizes.size();
    axis_k_.resize(naxes);
    axis_x_.resize(naxes);
    std::vector<std::vector<double>> axis_mask(naxes);

    for (std::size_t a = 0; a < naxes; ++a) {
      const std::size_t n = geom_.sizes[a];
      const double len = geom_.lengths[a];
      axis_k_[a].resize(n);
      axis_x_[a].resize(n);
      axis_mask[a].resize(n);
      if (radial()) {
        const double h = len / static_cast<double>(n);
        for (std::size_t j = 0; j < n; ++j) {
          axis_x_[a][j] = (static_cast<double>(j) + 0.5) * h;
          axis_k_[a][j] = static_cast<double>(j + 1) * std::numbers::pi / len;
          axis_mask[a][j] = 3 * (j + 1) <= 2 * n ? 1.0 : 0.0;
        }
      } else {
        const double dk = 2.0 * std::numbers::pi / len;
        const long half = static_cast<long>(n / 2);
        for (std::size_t j = 0; j < n; ++j) {
          const long m = static_cast<long>(j) < half ? static_cast<long>(j) : static_cast<long>(j) - static_cast<long>(n);
          axis_x_[a][j] = -0.5 * len + static_cast<double>(j) * len / static_cast<double>(n);
          axis_k_[a][j] = dk * static_cast<double>(m);
          axis_mask[a][j] = 3 * std::labs(m) <= static_cast<long>(n) ? 1.0 : 0.0;
        }
      }
    }

    k2_.assign(total, 0.0);
    r2_.assign(total, 0.0);
    dealias_.assign(total, 1.0);
    shift_sign_.assign(total, 1.0);
    weights_.assign(total, 0.0);
    mode_weight_.assign(total, 1.0);
    if (radial()) mode_weight_.back() = 2.0;

    // Row-major: last axis fastest.
    std::vector<std::size_t> idx(naxes, 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
      double k2 = 0.0, r2 = 0.0, mask = 1.0;
      std::size_t parity = 0;
      for (std::size_t a = 0; a < naxes; ++a) {
        const double k = axis_k_[a][idx[a]];
        const double x = axis_x_[a][idx[a]];
        k2 += k * k;
        r2 += x * x;
        mask *= axis_mask[a][idx[a]];
        parity += idx[a];
      }
      k2_[flat] = k2;
      r2_[flat] = r2;
      dealias_[flat] = mask;
      shift_sign_[flat] = (parity % 2 == 0) ? 1.0 : -1.0;
      for (std::size_t a = naxes; a-- > 0;) {
        if (++idx[a] < geom_.sizes[a]) break;
        idx[a] = 0;
      }
    }

    k_max_ = 0.0;
    for (double k2 : k2_) k_max_ = std::max(k_max_, std::sqrt(k2));

    if (radial()) {
      const double h = geom_.spacing(0);
      const double len = geom_.lengths[0];
      for (std::size_t j = 0; j < total; ++j) weights_[j] = 4.0 * std::numbers::pi * r2_[j] * h;
      spectral_measure_ = 4.0 * std::numbers::pi * 0.5 * len;
    } else {
      double dv = 1.0;
      for (std::size_t a = 0; a < naxes; ++a) dv *= geom_.spacing(a);
      std::fill(weights_.begin(), weights_.end(), dv);
      spectral_measure_ = volume();
    }
  }

  void build_plans() {
    const std::size_t total = geom_.total();
    std::lock_guard lock(detail::fftw_planner_mutex());
    auto* buf = fftw_alloc_complex(total);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    if (radial()) {
      const int n = static_cast<int>(geom_.sizes[0]);
      fftw_r2r_kind fwd = FFTW_RODFT10;
      fftw_r2r_kind inv = FFTW_RODFT01;
      auto* d = reinterpret_cast<double*>(buf);
      plan_.reset(fftw_plan_many_r2r(1, &n, 2, d, nullptr, 2, 1, d, nullptr, 2, 1, &fwd, flags));
      iplan_.reset(fftw_plan_many_r2r(1, &n, 2, d, nullptr, 2, 1, d, nullptr, 2, 1, &inv, flags));
    } else {
      std::vector<int> n(geom_.sizes.begin(), geom_.sizes.end());
      plan_.reset(fftw_plan_dft(static_cast<int>(n.size()), n.data(), buf, buf, FFTW_FORWARD, flags));
      iplan_.reset(fftw_plan_dft(static_cast<int>(n.size()), n.data(), buf, buf, FFTW_BACKWARD, flags));
    }
    fftw_free(buf);
    if (!plan_ || !iplan_) throw ConfigError("failed to create FFTW plans");
  }

  Geometry geom_;
  std::vector<double> k2_;
  std::vector<double> r2_;
  std::vector<double> dealias_;
  std::vector<double> shift_sign_;
  std::vector<double> weights_;
  std::vector<double> mode_weight_;
  std::vector<std::vector<double>> axis_k_;
  std::vector<std::vector<double>> axis_x_;
  double k_max_ = 0.0;
  double spectral_measure_ = 1.0;
  detail::PlanHandle plan_;
  detail::PlanHandle iplan_;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr make_grid(Geometry geom) { return std::make_shared<const Grid>(std::move(geom)); }

inline std::vector<cplx> transform_forward(std::span<const cplx> values, const Grid& grid) {
  std::vector<cplx> out(values.begin(), values.end());
  grid.forward(out);
  return out;
}

inline std::vector<cplx> transform_inverse(std::span<const cplx> coefficients, const Grid& grid) {
  std::vector<cplx> out(coefficients.begin(), coefficients.end());
  grid.inverse(out);
  return out;
}

}  // namespace nlsd
