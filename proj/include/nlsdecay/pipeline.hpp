#pragma once
// Run-directory orchestration behind the command line driver.
//
// Layout of a run directory:
//   config.json          config echo with "config_hash"
//   snapshots/snap_NNNNNN.nlsf
//   observables.csv      t,l2,linf,l4,energy,<requested norms>
//   conservation.csv     step,t,mass,energy
//   scatter.json, u_plus.nlsf   (measure, when probe_times are set)
//   duhamel.json                (measure, when a duhamel block is set)
//   rates.json                  (fit)

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "nlsdecay/config.hpp"
#include "nlsdecay/log.hpp"
#include "nlsdecay/observe.hpp"
#include "nlsdecay/profiles.hpp"
#include "nlsdecay/propagate.hpp"
#include "nlsdecay/report.hpp"
#include "nlsdecay/serialize.hpp"
#include "nlsdecay/snapshot_io.hpp"

namespace nlsd {

namespace fs = std::filesystem;

inline fs::path snapshot_path(const fs::path& run_dir, std::size_t index) {
  char name[32];
  std::snprintf(name, sizeof name, "snap_%06zu.nlsf", index);
  return run_dir / "snapshots" / name;
}

/// Standard columns followed by the requested norms (duplicates dropped).
inline std::vector<std::string> observable_columns(const std::vector<std::string>& requested) {
  auto cols = standard_columns();
  for (const auto& n : requested)
    if (std::find(cols.begin(), cols.end(), n) == cols.end()) cols.push_back(n);
  return cols;
}

inline Field initial_field(const RunConfig& cfg, const GridPtr& grid) {
  if (cfg.initial_snapshot) return read_snapshot(*cfg.initial_snapshot, grid);
  ProfileSpec spec = cfg.profile;
  spec.geometry = cfg.geometry;
  return build_profile(spec, grid);
}

/// Hash stored in a run directory's config echo.
inline std::string stored_hash(const fs::path& run_dir) {
  const auto path = run_dir / "config.json";
  if (!fs::exists(path)) return {};
  const auto j = read_json_file(path);
  return j.contains("config_hash") && j["config_hash"].is_string() ? j["config_hash"].get<std::string>() : "";
}

struct SimulateResult {
  fs::path run_dir;
  std::size_t snapshot_count = 0;
  DriftSummary drift;
};

inline SimulateResult run_simulate(const RunConfig& cfg, const fs::path& run_dir, bool force = false) {
  const auto previous = stored_hash(run_dir);
  if (!previous.empty() && previous != cfg.hash && !force)
    throw ConfigError(run_dir.string() + " holds a run with config hash " + previous + " (this config is " +
                      cfg.hash + "); use --force to overwrite");

  const auto grid = make_grid(cfg.geometry);
  const Field u0 = initial_field(cfg, grid);
  check_spreading(u0, cfg.solver.t_end, "run '" + cfg.run_id + "'");
  const Trajectory traj = evolve(u0, cfg.solver);

  std::error_code ec;
  fs::create_directories(run_dir, ec);
  if (ec) throw IoError("cannot create " + run_dir.string() + ": " + ec.message());
  fs::remove_all(run_dir / "snapshots", ec);
  for (const char* stale : {"scatter.json", "duhamel.json", "rates.json", "u_plus.nlsf"}) fs::remove(run_dir / stale, ec);
  fs::create_directories(run_dir / "snapshots", ec);
  if (ec) throw IoError("cannot create snapshot directory: " + ec.message());

  json echo = cfg.document;
  echo["config_hash"] = cfg.hash;
  write_json_file(run_dir / "config.json", echo);
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) write_snapshot(snapshot_path(run_dir, i), traj.snapshots[i]);

  auto series = measure(traj, observable_columns(cfg.observe.norms));
  series.run_id = cfg.run_id;
  series.config_hash = cfg.hash;
  write_text_file(run_dir / "observables.csv", observables_csv(series));
  write_text_file(run_dir / "conservation.csv", conservation_csv(traj, cfg.hash));
  return {run_dir, traj.snapshots.size(), conservation_drift(traj)};
}

struct LoadedRun {
  RunConfig config;
  Trajectory trajectory;
};

/// Reads the config echo and every stored snapshot of a run directory.
inline LoadedRun load_run(const fs::path& run_dir) {
  const auto cfg_path = run_dir / "config.json";
  if (!fs::exists(cfg_path)) throw IoError(run_dir.string() + " is not a run directory (no config.json)");
  LoadedRun run{parse_run_config(read_text_file(cfg_path), cfg_path.string(), run_dir), {}};
  const auto grid = make_grid(run.config.geometry);
  if (!fs::is_directory(run_dir / "snapshots")) throw IoError(run_dir.string() + ": missing snapshots directory");
  for (std::size_t i = 0;; ++i) {
    const auto p = snapshot_path(run_dir, i);
    if (!fs::exists(p)) break;
    run.trajectory.snapshots.push_back(read_snapshot(p, grid));
  }
  if (run.trajectory.snapshots.empty()) throw IoError(run_dir.string() + ": no snapshots found");
  const std::size_t expected = run.config.solver.step_count() / run.config.solver.snapshot_stride + 1 +
                               (run.config.solver.step_count() % run.config.solver.snapshot_stride != 0 ? 1 : 0);
  if (run.trajectory.snapshots.size() != expected)
    throw IoError(run_dir.string() + ": expected " + std::to_string(expected) + " snapshots, found " +
                  std::to_string(run.trajectory.snapshots.size()));
  run.trajectory.config = run.config.solver;
  run.trajectory.sponge_active = run.config.solver.sponge.has_value() && run.config.solver.sponge->strength > 0.0;
  return run;
}

/// Applies an override config's observe/fit blocks after checking its hash.
inline void apply_override(RunConfig& run_cfg, const std::optional<RunConfig>& override_cfg, bool force) {
  if (!override_cfg) return;
  if (override_cfg->hash != run_cfg.hash && !force)
    throw ConfigError("config hash " + override_cfg->hash + " does not match the run's " + run_cfg.hash +
                      "; use --force to measure anyway");
  run_cfg.observe = override_cfg->observe;
  run_cfg.fit = override_cfg->fit;
}

struct MeasureResult {
  std::vector<fs::path> written;
};

inline MeasureResult run_measure(const fs::path& run_dir, const std::optional<RunConfig>& override_cfg = std::nullopt,
                                 bool force = false) {
  auto run = load_run(run_dir);
  apply_override(run.config, override_cfg, force);
  const auto& cfg = run.config;
  const auto& traj = run.trajectory;
  MeasureResult res;

  auto series = measure(traj, observable_columns(cfg.observe.norms));
  series.run_id = cfg.run_id;
  series.config_hash = cfg.hash;
  write_text_file(run_dir / "observables.csv", observables_csv(series));
  res.written.push_back(run_dir / "observables.csv");

  if (cfg.observe.probe_times.size() == 2) {
    std::vector<double> starts = cfg.observe.tail_starts;
    if (starts.empty()) {
      // every snapshot that still leaves enough samples for the quadrature
      const auto& snaps = traj.snapshots;
      for (std::size_t i = 1; i + kMinTailSnapshots <= snaps.size(); ++i) starts.push_back(snaps[i].time);
    }
    const auto rep = make_scatter_report(traj, cfg.observe.probe_times[0], cfg.observe.probe_times[1], starts);
    write_snapshot(run_dir / "u_plus.nlsf", rep.u_plus);
    write_json_file(run_dir / "scatter.json", scatter_json(rep, cfg.hash, cfg.run_id));
    res.written.push_back(run_dir / "scatter.json");
    res.written.push_back(run_dir / "u_plus.nlsf");
  }

  if (cfg.observe.duhamel) {
    const auto& d = *cfg.observe.duhamel;
    const auto rep = d.edges.empty()
                         ? duhamel_decompose(traj, d.t, refocus_windows(traj.start_time(), *d.delay, *d.m, d.t))
                         : duhamel_decompose(traj, d.t, d.edges);
    write_json_file(run_dir / "duhamel.json", duhamel_json(rep, cfg.hash, cfg.run_id));
    res.written.push_back(run_dir / "duhamel.json");
  }
  return res;
}

/// Fits the configured (or default) targets against the measured reports.
inline std::vector<RateComparison> fit_reports(const RunConfig& cfg, const ObservableSeries& series,
                                               const std::optional<ScatterSeries>& scatter) {
  std::vector<RateComparison> out;
  for (const auto& target : default_targets_for(cfg)) {
    if (target.series == "convergence" || target.series == "tail") {
      if (!scatter) {
        RateComparison c;
        c.target = target;
        c.message = "no scatter report (set observe.probe_times and run measure)";
        out.push_back(c);
        continue;
      }
      if (target.series == "convergence") out.push_back(compare_rate(target, scatter->convergence, scatter->resolution_floor));
      else out.push_back(compare_rate(target, scatter->tail));
      continue;
    }
    std::vector<Sample> samples;
    try {
      samples = series.column(target.series);
    } catch (const ConfigError& e) {
      RateComparison c;
      c.target = target;
      c.message = e.what();
      out.push_back(c);
      continue;
    }
    out.push_back(compare_rate(target, samples));
  }
  return out;
}

inline std::vector<RateComparison> run_fit(const fs::path& run_dir,
                                           const std::optional<RunConfig>& override_cfg = std::nullopt,
                                           bool force = false) {
  const auto cfg_path = run_dir / "config.json";
  if (!fs::exists(cfg_path)) throw IoError(run_dir.string() + " is not a run directory (no config.json)");
  RunConfig cfg = parse_run_config(read_text_file(cfg_path), cfg_path.string(), run_dir);
  apply_override(cfg, override_cfg, force);

  const auto series = read_observables_csv(run_dir / "observables.csv");
  if (series.config_hash != cfg.hash && !force)
    throw ConfigError("observables.csv hash " + series.config_hash + " does not match the run's " + cfg.hash +
                      "; use --force");
  std::optional<ScatterSeries> scatter;
  if (fs::exists(run_dir / "scatter.json")) {
    scatter = parse_scatter_json(read_json_file(run_dir / "scatter.json"), (run_dir / "scatter.json").string());
    if (scatter->config_hash != cfg.hash && !force)
      throw ConfigError("scatter.json hash " + scatter->config_hash + " does not match the run's " + cfg.hash +
                        "; use --force");
  }
  auto comparisons = fit_reports(cfg, series, scatter);
  write_json_file(run_dir / "rates.json", rates_json(comparisons, cfg.hash, cfg.run_id));
  return comparisons;
}

// ---------------------------------------------------------------------------
// Exit-code mapping and the sweep runner

/// Runs `body`, mapping exceptions to exit codes and reporting them on `err`.
inline int guarded(const std::function<void()>& body, std::ostream& err) {
  try {
    body();
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    err << "numeric abort: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

/// Default worker count: NLSDECAY_THREADS when set to a positive integer, else 1.
inline unsigned default_thread_count() {
  if (const char* env = std::getenv("NLSDECAY_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<unsigned>(n);
  }
  return 1;
}

struct SweepEntry {
  fs::path config;
  fs::path out;
};

struct SweepOutcome {
  SweepEntry entry;
  int exit_code = 0;
  std::string message;
};

inline std::vector<SweepEntry> load_sweep(const fs::path& path) {
  const auto j = read_json_file(path);
  if (!j.is_object() || !j.contains("runs") || !j["runs"].is_array())
    throw ConfigError(path.string() + ":1: sweep file needs a \"runs\" array");
  std::vector<SweepEntry> out;
  for (const auto& r : j["runs"]) {
    if (!r.is_object() || !r.contains("config") || !r["config"].is_string())
      throw ConfigError(path.string() + ": every run needs a \"config\" path");
    SweepEntry e;
    e.config = r["config"].get<std::string>();
    if (e.config.is_relative()) e.config = path.parent_path() / e.config;
    if (r.contains("out")) {
      e.out = r["out"].get<std::string>();
      if (e.out.is_relative()) e.out = path.parent_path() / e.out;
    }
    out.push_back(e);
  }
  return out;
}

/// simulate, then measure and fit, for one config. Directory defaults to the
/// config's output_dir, else "runs/<run_id>" next to the config.
inline void run_pipeline(const fs::path& config_path, fs::path out, bool force) {
  const auto cfg = load_run_config(config_path);
  if (out.empty()) out = cfg.output_dir.empty() ? config_path.parent_path() / "runs" / cfg.run_id
                                                : config_path.parent_path() / cfg.output_dir;
  run_simulate(cfg, out, force);
  run_measure(out, std::nullopt, force);
  run_fit(out, std::nullopt, force);
}

inline std::vector<SweepOutcome> run_sweep(const std::vector<SweepEntry>& entries, unsigned threads, bool force) {
  std::vector<SweepOutcome> outcomes(entries.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < entries.size(); i = next++) {
      std::ostringstream err;
      outcomes[i].entry = entries[i];
      outcomes[i].exit_code = guarded([&] { run_pipeline(entries[i].config, entries[i].out, force); }, err);
      outcomes[i].message = err.str();
      if (!outcomes[i].message.empty() && outcomes[i].message.back() == '\n') outcomes[i].message.pop_back();
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(entries.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return outcomes;
}

}  // namespace nlsd
