#pragma once
// Free Schrodinger flow and the Strang split-step integrator for the
// defocusing cubic equation  i u_t + Lap u = |u|^2 u.
//
// Sign convention: exp(i t Lap) multiplies mode k by exp(-i |k|^2 t).

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "nlsdecay/errors.hpp"
#include "nlsdecay/fields.hpp"

namespace nlsd {

/// exp(i t Lap) applied exactly in spectral space.
inline Field free_propagate(const Field& f, double t) {
  Field out = f;
  out.time = f.time + t;
  if (t == 0.0) return out;
  const auto k2 = f.grid->k2();
  f.grid->forward(out.values);
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] *= std::polar(1.0, -k2[i] * t);
  f.grid->inverse(out.values);
  return out;
}

struct Sponge {
  double start_radius = 0.0;
  double strength = 0.0;
};

struct SolverConfig {
  double dt = 0.01;
  double t_end = 0.0;
  std::size_t snapshot_stride = 1;  ///< steps between stored snapshots
  bool dealias = true;
  bool nonlinear = true;  ///< false runs the free flow through the same stepper (reference runs)
  std::optional<Sponge> sponge;
  double mass_drift_limit = 1e-8;    ///< relative; abort beyond this (ignored with a sponge)
  double energy_drift_limit = 1e-2;  ///< relative; abort beyond this (ignored with a sponge)

  [[nodiscard]] std::size_t step_count() const {
    const double n = std::round(t_end / dt);
    return static_cast<std::size_t>(n);
  }

  void validate(const Geometry& geom) const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("solver dt must be positive");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ConfigError("solver t_end must be nonnegative");
    if (snapshot_stride < 1) throw ConfigError("snapshot_stride must be >= 1");
    const double n = std::round(t_end / dt);
    if (std::abs(n * dt - t_end) > 1e-9 * std::max(1.0, t_end))
      throw ConfigError("t_end must be an integer multiple of dt");
    if (sponge) {
      if (geom.mode != Mode::radial_3d) throw ConfigError("sponge is only available in radial-3d mode");
      if (!(sponge->start_radius < geom.lengths[0]) || sponge->start_radius < 0.0)
        throw ConfigError("sponge start radius must lie inside the domain");
      if (!(sponge->strength >= 0.0)) throw ConfigError("sponge strength must be nonnegative");
    }
  }
};

struct ConservationRecord {
  std::size_t step = 0;
  double time = 0.0;
  double mass = 0.0;
  double energy = 0.0;
};

struct Trajectory {
  std::vector<Field> snapshots;
  std::vector<ConservationRecord> conservation;
  SolverConfig config;
  bool sponge_active = false;

  [[nodiscard]] bool empty() const { return snapshots.empty(); }
  [[nodiscard]] double start_time() const { return snapshots.front().time; }
  [[nodiscard]] double end_time() const { return snapshots.back().time; }

  /// Index of the snapshot at time t (within a rounding tolerance), if any.
  [[nodiscard]] std::optional<std::size_t> find(double t) const {
    const double tol = 1e-9 * std::max(1.0, std::abs(t));
    std::size_t lo = 0, hi = snapshots.size();
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (snapshots[mid].time < t - tol) lo = mid + 1;
      else hi = mid;
    }
    if (lo < snapshots.size() && std::abs(snapshots[lo].time - t) <= tol) return lo;
    return std::nullopt;
  }

  [[nodiscard]] const Field& at(double t) const {
    auto i = find(t);
    if (!i) throw ConfigError("no snapshot stored at t = " + std::to_string(t));
    return snapshots[*i];
  }
};

/// Reusable Strang stepper with precomputed phase tables for a fixed dt.
class SplitStepper {
 public:
  SplitStepper(GridPtr grid, double dt, bool dealias, std::optional<Sponge> sponge = std::nullopt,
               double coupling = 1.0)
      : grid_(std::move(grid)), dt_(dt), coupling_(coupling) {
    if (!(dt > 0.0)) throw ConfigError("time step must be positive");
    const auto k2 = grid_->k2();
    const auto mask = grid_->dealias_mask();
    linear_.resize(k2.size());
    for (std::size_t i = 0; i < k2.size(); ++i) {
      linear_[i] = std::polar(1.0, -k2[i] * dt);
      if (dealias) linear_[i] *= mask[i];
    }
    if (grid_->radial()) {
      const auto r = grid_->coordinates(0);
      inv_r2_.resize(r.size());
      for (std::size_t j = 0; j < r.size(); ++j) inv_r2_[j] = 1.0 / (r[j] * r[j]);
      if (sponge && sponge->strength > 0.0) {
        const double radius = grid_->geometry().lengths[0];
        damping_.resize(r.size(), 1.0);
        for (std::size_t j = 0; j < r.size(); ++j) {
          if (r[j] <= sponge->start_radius) continue;
          const double x = (r[j] - sponge->start_radius) / (radius - sponge->start_radius);
          const double ramp = std::sin(0.5 * std::numbers::pi * x);
          damping_[j] = std::exp(-sponge->strength * dt * ramp * ramp);
        }
      }
    }
  }

  [[nodiscard]] double dt() const { return dt_; }

  void step(std::vector<cplx>& v) const {
    nonlinear_half(v);
    grid_->forward(v);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= linear_[i];
    grid_->inverse(v);
    if (!damping_.empty()) {
      for (std::size_t j = 0; j < v.size(); ++j) v[j] *= damping_[j];
    }
    nonlinear_half(v);
  }

 private:
  // i u_t = |u|^2 u keeps |u| fixed pointwise, so the phase rotation is exact.
  void nonlinear_half(std::vector<cplx>& v) const {
    if (coupling_ == 0.0) return;
    const double h = 0.5 * dt_ * coupling_;
    if (inv_r2_.empty()) {
      for (auto& z : v) z *= std::polar(1.0, -std::norm(z) * h);
    } else {
      for (std::size_t j = 0; j < v.size(); ++j) v[j] *= std::polar(1.0, -std::norm(v[j]) * inv_r2_[j] * h);
    }
  }

  GridPtr grid_;
  double dt_;
  double coupling_;
  std::vector<cplx> linear_;
  std::vector<double> inv_r2_;
  std::vector<double> damping_;
};

/// One Strang step: half nonlinear phase, full linear flow, half nonlinear phase.
inline Field nls_step(const Field& f, double dt, bool dealias = true) {
  SplitStepper stepper(f.grid, dt, dealias);
  Field out = f;
  stepper.step(out.values);
  out.time = f.time + dt;
  require_finite(out, "nls_step");
  return out;
}

namespace detail {
inline double relative_drift(double value, double reference) {
  const double scale = std::abs(reference);
  return scale > 0.0 ? std::abs(value - reference) / scale : std::abs(value - reference);
}
}  // namespace detail

/// Integrates from the initial field to t_end, storing every
/// snapshot_stride-th step plus the final state.
inline Trajectory evolve(const Field& initial, const SolverConfig& config) {
  config.validate(initial.geometry());
  require_finite(initial, "initial data");

  Trajectory traj;
  traj.config = config;
  traj.sponge_active = config.sponge.has_value() && config.sponge->strength > 0.0;

  const std::size_t steps = config.step_count();
  const double t0 = initial.time;
  const double m0 = mass(initial);
  const double e0 = config.nonlinear ? energy(initial) : std::pow(norm_hdot(initial, 1.0), 2) * 0.5;
  traj.snapshots.push_back(initial);
  traj.conservation.push_back({0, t0, m0, e0});
  if (steps == 0) return traj;

  SplitStepper stepper(initial.grid, config.dt, config.dealias, config.sponge, config.nonlinear ? 1.0 : 0.0);
  Field current = initial;
  for (std::size_t n = 1; n <= steps; ++n) {
    stepper.step(current.values);
    current.time = t0 + static_cast<double>(n) * config.dt;
    require_finite(current, ("step " + std::to_string(n)).c_str());

    const double m = mass(current);
    const double e = config.nonlinear ? energy(current) : std::pow(norm_hdot(current, 1.0), 2) * 0.5;
    traj.conservation.push_back({n, current.time, m, e});
    if (!traj.sponge_active) {
      if (detail::relative_drift(m, m0) > config.mass_drift_limit)
        throw NumericError("mass drift " + std::to_string(detail::relative_drift(m, m0)) + " at t = " +
                           std::to_string(current.time) + " exceeds limit");
      if (detail::relative_drift(e, e0) > config.energy_drift_limit)
        throw NumericError("energy drift " + std::to_string(detail::relative_drift(e, e0)) + " at t = " +
                           std::to_string(current.time) + " exceeds limit");
    }
    if (n % config.snapshot_stride == 0 || n == steps) traj.snapshots.push_back(current);
  }
  return traj;
}

/// Relative conservation errors against the first record. `mass` and
/// `energy_excursion` are maxima over all steps; `energy` is the net change
/// between the first and last step (splitting leaves a bounded O(dt^2)
/// oscillation around the conserved value, reported as the excursion).
struct DriftSummary {
  double mass = 0.0;
  double energy = 0.0;
  double energy_excursion = 0.0;
};

inline DriftSummary conservation_drift(const Trajectory& traj) {
  DriftSummary d;
  if (traj.conservation.empty()) return d;
  const auto& ref = traj.conservation.front();
  for (const auto& rec : traj.conservation) {
    d.mass = std::max(d.mass, detail::relative_drift(rec.mass, ref.mass));
    d.energy_excursion = std::max(d.energy_excursion, detail::relative_drift(rec.energy, ref.energy));
  }
  d.energy = detail::relative_drift(traj.conservation.back().energy, ref.energy);
  return d;
}

}  // namespace nlsd
