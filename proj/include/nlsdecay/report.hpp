#pragma once
// Scattering report assembly and the comparison of measured rates with targets.

#include <string>
#include <vector>

#include "nlsdecay/observe.hpp"
#include "nlsdecay/ratefit.hpp"

namespace nlsd {

struct ScatterReport {
  Field u_plus;
  double u_plus_hdot_half = 0.0;
  double cauchy_gap = 0.0;
  double probe_t1 = 0.0;
  double probe_t2 = 0.0;
  std::vector<ConvergencePoint> convergence_series;
  std::vector<TailPoint> tail_series;
  double truncation_horizon = 0.0;
  bool sponge_active = false;

  /// Resolution floor for convergence fits: the Cauchy gap, never below
  /// 1e-12 of ||u_plus||_{Hdot^{1/2}} (round-off level of the distance).
  [[nodiscard]] double resolution_floor() const { return std::max(cauchy_gap, 1e-12 * u_plus_hdot_half); }
};

/// Final-state estimate from (t1, t2), convergence distance at every
/// snapshot, and the truncated L^5 tail at the requested starts.
inline ScatterReport make_scatter_report(const Trajectory& traj, double t1, double t2,
                                         const std::vector<double>& tail_starts) {
  ScatterReport rep;
  auto est = estimate_final_state(traj, t1, t2);
  rep.u_plus = std::move(est.u_plus);
  rep.u_plus_hdot_half = norm_hdot(rep.u_plus, 0.5);
  rep.cauchy_gap = est.cauchy_gap;
  rep.probe_t1 = est.t1;
  rep.probe_t2 = est.t2;
  rep.convergence_series = convergence_distance(traj, rep.u_plus, snapshot_times(traj), rep.cauchy_gap);
  rep.tail_series = spacetime_tail(traj, tail_starts);
  rep.truncation_horizon = traj.end_time();
  rep.sponge_active = traj.sponge_active;
  return rep;
}

inline std::vector<Sample> convergence_samples(const ScatterReport& rep) {
  std::vector<Sample> out;
  for (const auto& p : rep.convergence_series) out.emplace_back(p.t, p.distance);
  return out;
}

inline std::vector<Sample> tail_samples(const ScatterReport& rep) {
  std::vector<Sample> out;
  for (const auto& p : rep.tail_series) out.emplace_back(p.s, p.value);
  return out;
}

/// Default targets: the dispersive L^infinity rate, the interpolated L^4 rate,
/// the convergence rate and the spacetime tail rate, fitted from `t_min` on.
inline std::vector<RateTarget> default_rate_targets(double t_min, double t_max) {
  return {
      {"linf_decay", "linf", t_min, t_max, kDispersiveExponent, 0.1, 1.0},
      {"l4_decay", "l4", t_min, t_max, lp_decay_exponent(4.0), 0.1, 1.0},
      {"convergence_rate", "convergence", t_min, t_max, kConvergenceExponent, 1.0, 10.0},
      {"tail_rate", "tail", t_min, t_max, kTailExponent, 0.2, 1.0},
  };
}

/// Fits every target against its series; convergence samples under the
/// resolution floor are excluded before fitting.
inline std::vector<RateComparison> rate_report(const ScatterReport* scatter, const ObservableSeries* series,
                                               const std::vector<RateTarget>& targets) {
  std::vector<RateComparison> out;
  out.reserve(targets.size());
  for (const auto& target : targets) {
    if (target.series == "convergence") {
      if (!scatter) throw ConfigError("target '" + target.name + "' needs a scatter report");
      out.push_back(compare_rate(target, convergence_samples(*scatter), scatter->resolution_floor()));
    } else if (target.series == "tail") {
      if (!scatter) throw ConfigError("target '" + target.name + "' needs a scatter report");
      out.push_back(compare_rate(target, tail_samples(*scatter)));
    } else {
      if (!series) throw ConfigError("target '" + target.name + "' needs an observables series");
      out.push_back(compare_rate(target, series->column(target.series)));
    }
  }
  return out;
}

inline std::vector<RateComparison> rate_report(const ScatterReport& scatter, const ObservableSeries& series,
                                               const std::vector<RateTarget>& targets) {
  return rate_report(&scatter, &series, targets);
}

}  // namespace nlsd
