#pragma once
// Time-dependent measurements on a stored trajectory: norm series, the
// final-state estimate with its convergence distance, truncated L^5 spacetime
// tails, and the windowed Duhamel decomposition.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nlsdecay/errors.hpp"
#include "nlsdecay/fields.hpp"
#include "nlsdecay/log.hpp"
#include "nlsdecay/propagate.hpp"

namespace nlsd {

// ---------------------------------------------------------------------------
// Norm series

enum class NormKind { lp, linf, hdot, h, energy, mass };

struct NormSpec {
  std::string name;
  NormKind kind = NormKind::lp;
  double order = 2.0;
};

/// Parses column names: "l<p>" (p >= 1, or "linf"), "hdot<s>", "h<s>", "energy", "mass".
inline NormSpec parse_norm_spec(const std::string& name) {
  auto number = [&](std::size_t offset) {
    const std::string tail = name.substr(offset);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tail, &used);
    } catch (const std::exception&) {
      throw ConfigError("unrecognised norm '" + name + "'");
    }
    if (used != tail.size()) throw ConfigError("unrecognised norm '" + name + "'");
    return v;
  };
  if (name == "energy") return {name, NormKind::energy, 0.0};
  if (name == "mass") return {name, NormKind::mass, 0.0};
  if (name == "linf") return {name, NormKind::linf, INFINITY};
  if (name.rfind("hdot", 0) == 0) {
    const double s = number(4);
    if (s < 0.0) throw ConfigError("Sobolev order must be nonnegative in '" + name + "'");
    return {name, NormKind::hdot, s};
  }
  if (name.size() > 1 && name[0] == 'h') {
    const double s = number(1);
    if (s < 0.0) throw ConfigError("Sobolev order must be nonnegative in '" + name + "'");
    return {name, NormKind::h, s};
  }
  if (name.size() > 1 && name[0] == 'l') {
    const double p = number(1);
    if (p < 1.0) throw ConfigError("L^p norm requires p >= 1 in '" + name + "'");
    return {name, NormKind::lp, p};
  }
  throw ConfigError("unrecognised norm '" + name + "'");
}

inline double evaluate_norm(const Field& f, const NormSpec& spec) {
  switch (spec.kind) {
    case NormKind::lp: return norm_lp(f, spec.order);
    case NormKind::linf: return norm_linf(f);
    case NormKind::hdot: return norm_hdot(f, spec.order);
    case NormKind::h: return norm_h(f, spec.order);
    case NormKind::energy: return energy(f);
    case NormKind::mass: return mass(f);
  }
  return 0.0;
}

/// Columns always written first to observables files.
inline const std::vector<std::string>& standard_columns() {
  static const std::vector<std::string> cols{"l2", "linf", "l4", "energy"};
  return cols;
}

struct ObservableSeries {
  std::vector<std::string> columns;
  std::vector<double> times;
  std::vector<std::vector<double>> rows;  ///< rows[i][c] is column c at times[i]
  std::string run_id;
  std::string config_hash;

  [[nodiscard]] std::size_t column_index(const std::string& name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw ConfigError("series has no column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
  }

  /// (t, value) pairs for one column.
  [[nodiscard]] std::vector<std::pair<double, double>> column(const std::string& name) const {
    const auto c = column_index(name);
    std::vector<std::pair<double, double>> out;
    out.reserve(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) out.emplace_back(times[i], rows[i][c]);
    return out;
  }
};

/// One record per snapshot with the requested norms, in request order.
inline ObservableSeries measure(const Trajectory& traj, const std::vector<std::string>& requested) {
  if (traj.empty()) throw ConfigError("cannot measure an empty trajectory");
  std::vector<NormSpec> specs;
  specs.reserve(requested.size());
  for (const auto& name : requested) specs.push_back(parse_norm_spec(name));

  ObservableSeries series;
  series.columns = requested;
  series.times.reserve(traj.snapshots.size());
  series.rows.reserve(traj.snapshots.size());
  for (const auto& snap : traj.snapshots) {
    std::vector<double> row;
    row.reserve(specs.size());
    for (const auto& spec : specs) row.push_back(evaluate_norm(snap, spec));
    series.times.push_back(snap.time);
    series.rows.push_back(std::move(row));
  }
  return series;
}

// ---------------------------------------------------------------------------
// Final state and convergence distance

struct FinalStateEstimate {
  Field u_plus;             ///< exp(-i t2 Lap) u(t2)
  double cauchy_gap = 0.0;  ///< Hdot^{1/2} distance between the t1 and t2 estimates
  double t1 = 0.0;
  double t2 = 0.0;
};

/// Pulls u(t) back along the free flow: w(t) = exp(-i t Lap) u(t).
inline Field pull_back(const Field& u) {
  Field w = free_propagate(u, -u.time);
  w.time = 0.0;
  return w;
}

inline FinalStateEstimate estimate_final_state(const Trajectory& traj, double t1, double t2) {
  if (traj.empty()) throw ConfigError("cannot estimate a final state from an empty trajectory");
  if (!(t1 < t2)) throw ConfigError("final-state probes require t1 < t2");
  const auto i1 = traj.find(t1);
  const auto i2 = traj.find(t2);
  if (!i1 || !i2) throw ConfigError("final-state probe times must coincide with stored snapshots");
  if (t1 < 0.5 * t2) {
    std::ostringstream os;
    os << "probe t1 = " << t1 << " is below half of t2 = " << t2 << "; the Cauchy gap may understate the error";
    warn(os.str());
  }
  FinalStateEstimate est;
  est.t1 = traj.snapshots[*i1].time;
  est.t2 = traj.snapshots[*i2].time;
  est.u_plus = pull_back(traj.snapshots[*i2]);
  est.cauchy_gap = norm_hdot(est.u_plus - pull_back(traj.snapshots[*i1]), 0.5);
  return est;
}

struct ConvergencePoint {
  double t = 0.0;
  double distance = 0.0;
  bool at_floor = false;  ///< distance below the Cauchy-gap resolution floor
};

/// d(t) = ||u(t) - exp(i t Lap) u_plus||_{Hdot^{1/2}} at the requested snapshot times.
inline std::vector<ConvergencePoint> convergence_distance(const Trajectory& traj, const Field& u_plus,
                                                          const std::vector<double>& times, double floor = 0.0) {
  std::vector<ConvergencePoint> out;
  out.reserve(times.size());
  for (double t : times) {
    const Field& u = traj.at(t);
    const Field free = free_propagate(u_plus, u.time - u_plus.time);
    const double d = norm_hdot(u - free, 0.5);
    out.push_back({u.time, d, d < floor});
  }
  return out;
}

/// All snapshot times of a trajectory.
inline std::vector<double> snapshot_times(const Trajectory& traj) {
  std::vector<double> t;
  t.reserve(traj.snapshots.size());
  for (const auto& s : traj.snapshots) t.push_back(s.time);
  return t;
}

// ---------------------------------------------------------------------------
// Spacetime L^5 tails

struct TailPoint {
  double s = 0.0;
  double value = 0.0;
};

inline constexpr std::size_t kMinTailSnapshots = 8;

/// Truncated (int_s^{t_end} int |u|^5 dx dt)^{1/5} by the trapezoid rule over
/// snapshots; s between snapshots uses the linear interpolant of the integrand.
inline std::vector<TailPoint> spacetime_tail(const Trajectory& traj, const std::vector<double>& s_values) {
  if (traj.empty()) throw ConfigError("cannot integrate an empty trajectory");
  const auto& snaps = traj.snapshots;
  const std::size_t n = snaps.size();
  const double t0 = snaps.front().time;
  const double t_end = snaps.back().time;
  const double tol = 1e-9 * std::max(1.0, std::abs(t_end));

  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = std::pow(norm_lp(snaps[i], 5.0), 5.0);
  // cumulative[i] = integral from t_i to t_end
  std::vector<double> cumulative(n, 0.0);
  for (std::size_t i = n - 1; i-- > 0;) {
    cumulative[i] = cumulative[i + 1] + 0.5 * (snaps[i + 1].time - snaps[i].time) * (g[i] + g[i + 1]);
  }

  std::vector<TailPoint> out;
  out.reserve(s_values.size());
  for (double s : s_values) {
    if (s < t0 - tol || s > t_end + tol)
      throw ConfigError("tail start s = " + std::to_string(s) + " lies outside the trajectory");
    if (s >= t_end - tol) {
      out.push_back({s, 0.0});
      continue;
    }
    // first snapshot with time >= s
    std::size_t k = 0;
    while (k < n && snaps[k].time < s - tol) ++k;
    if (n - k < kMinTailSnapshots)
      throw ConfigError("snapshot stride too coarse: tail from s = " + std::to_string(s) + " spans " +
                        std::to_string(n - k) + " snapshots (need " + std::to_string(kMinTailSnapshots) + ")");
    double integral = cumulative[k];
    if (k > 0 && snaps[k].time > s + tol) {
      const double ta = snaps[k - 1].time, tb = snaps[k].time;
      const double gs = g[k - 1] + (g[k] - g[k - 1]) * (s - ta) / (tb - ta);
      integral += 0.5 * (tb - s) * (gs + g[k]);
    }
    out.push_back({s, std::pow(std::max(integral, 0.0), 0.2)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Windowed Duhamel decomposition
//
// For i u_t + Lap u = |u|^2 u:
//   u(t) = exp(i(t - t0) Lap) u(t0) - i int_{t0}^{t} exp(i(t - s) Lap) (|u|^2 u)(s) ds,
// and the integral is split over consecutive windows.

/// Five windows around a refocusing at `delay`, with half-width M:
/// [t0, t0+M], [t0+M, delay-M], [delay-M, delay+M], [delay+M, 2 delay-M], [2 delay-M, t].
inline std::vector<double> refocus_windows(double t0, double delay, double m, double t) {
  std::vector<double> e{t0, t0 + m, t0 + delay - m, t0 + delay + m, t0 + 2.0 * delay - m, t};
  for (std::size_t i = 1; i < e.size(); ++i) {
    if (e[i] < e[i - 1])
      throw ConfigError("Duhamel windows are not ordered: need M > 0, delay >= 2M and t >= 2 delay - M");
  }
  if (!(m > 0.0)) throw ConfigError("Duhamel window parameter M must be positive");
  return e;
}

struct DuhamelReport {
  double t = 0.0;
  std::vector<double> edges;
  std::vector<Field> windows;  ///< F_1 .. F_k at time t
  Field linear;                ///< exp(i(t - t0) Lap) u(t0)
  double residual = 0.0;       ///< ||u(t) - linear - sum F_i||_2
  double solution_l2 = 0.0;    ///< ||u(t)||_2

  [[nodiscard]] double relative_residual() const { return solution_l2 > 0.0 ? residual / solution_l2 : residual; }
};

inline constexpr std::size_t kMinDuhamelIntervals = 8;

inline DuhamelReport duhamel_decompose(const Trajectory& traj, double t, const std::vector<double>& edges) {
  if (traj.empty()) throw ConfigError("cannot decompose an empty trajectory");
  if (edges.size() < 2) throw ConfigError("Duhamel decomposition needs at least one window");
  const auto& snaps = traj.snapshots;
  const auto it = traj.find(t);
  if (!it) throw ConfigError("Duhamel evaluation time must coincide with a stored snapshot");
  const auto i0 = traj.find(edges.front());
  if (!i0 || *i0 != 0) throw ConfigError("Duhamel windows must start at the first snapshot");
  const auto iend = traj.find(edges.back());
  if (!iend || *iend != *it) throw ConfigError("Duhamel windows must end at the evaluation time");

  std::vector<std::size_t> edge_idx;
  for (double e : edges) {
    const auto i = traj.find(e);
    if (!i) throw ConfigError("Duhamel window edge " + std::to_string(e) + " is not a snapshot time");
    if (!edge_idx.empty() && *i < edge_idx.back()) throw ConfigError("Duhamel window edges must be nondecreasing");
    edge_idx.push_back(*i);
  }
  if (*it < kMinDuhamelIntervals)
    throw ConfigError("snapshot stride too coarse: Duhamel quadrature over " + std::to_string(*it) +
                      " intervals (need " + std::to_string(kMinDuhamelIntervals) + ")");

  const Grid& grid = *snaps.front().grid;
  const auto k2 = grid.k2();
  const bool radial = grid.radial();
  const auto r2 = grid.radius2();
  const double t_eval = snaps[*it].time;
  const double coupling = traj.config.nonlinear ? 1.0 : 0.0;
  const std::size_t nwin = edge_idx.size() - 1;

  std::vector<std::vector<cplx>> acc(nwin, std::vector<cplx>(grid.size()));
  std::vector<cplx> work(grid.size());
  for (std::size_t i = 0; i <= *it; ++i) {
    // trapezoid weight of snapshot i inside each window
    std::vector<double> weight(nwin, 0.0);
    bool any = false;
    for (std::size_t w = 0; w < nwin; ++w) {
      const std::size_t a = edge_idx[w], b = edge_idx[w + 1];
      if (a == b || i < a || i > b) continue;
      double h = 0.0;
      if (i > a) h += 0.5 * (snaps[i].time - snaps[i - 1].time);
      if (i < b) h += 0.5 * (snaps[i + 1].time - snaps[i].time);
      weight[w] = h;
      any = true;
    }
    if (!any) continue;
    const auto& v = snaps[i].values;
    for (std::size_t j = 0; j < v.size(); ++j) {
      double a2 = std::norm(v[j]);
      if (radial) a2 /= r2[j];
      work[j] = coupling * a2 * v[j];
    }
    grid.forward(work);
    const double lag = t_eval - snaps[i].time;
    for (std::size_t m = 0; m < work.size(); ++m) work[m] *= std::polar(1.0, -k2[m] * lag);
    for (std::size_t w = 0; w < nwin; ++w) {
      if (weight[w] == 0.0) continue;
      const cplx c(0.0, -weight[w]);
      for (std::size_t m = 0; m < work.size(); ++m) acc[w][m] += c * work[m];
    }
  }

  DuhamelReport rep;
  rep.t = t_eval;
  for (auto i : edge_idx) rep.edges.push_back(snaps[i].time);
  rep.linear = free_propagate(snaps.front(), t_eval - snaps.front().time);
  Field sum = rep.linear;
  for (std::size_t w = 0; w < nwin; ++w) {
    grid.inverse(acc[w]);
    Field fw(snaps.front().grid, t_eval, std::move(acc[w]));
    sum += fw;
    rep.windows.push_back(std::move(fw));
  }
  const Field& u = snaps[*it];
  rep.residual = norm_l2(u - sum);
  rep.solution_l2 = norm_l2(u);
  return rep;
}

/// Five-window decomposition around a refocusing time.
inline DuhamelReport duhamel_decompose(const Trajectory& traj, double t, double delay, double m) {
  return duhamel_decompose(traj, t, refocus_windows(traj.start_time(), delay, m, t));
}

}  // namespace nlsd
