// Command line driver: simulate, measure, fit, verify, sweep.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nlsdecay/config.hpp"
#include "nlsdecay/pipeline.hpp"
#include "nlsdecay/verify.hpp"

namespace fs = std::filesystem;
using namespace nlsd;

namespace {

std::optional<RunConfig> optional_config(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return load_run_config(path);
}

fs::path resolve_run_dir(const RunConfig& cfg, const std::string& config_path, const std::string& out) {
  if (!out.empty()) return out;
  if (cfg.output_dir.empty())
    throw ConfigError(config_path + ":1: no output directory (pass --out or set \"output_dir\")");
  const fs::path dir = cfg.output_dir;
  return dir.is_relative() ? fs::path(config_path).parent_path() / dir : dir;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cubic NLS simulations with dispersive-decay and scattering diagnostics"};
  app.require_subcommand(1);

  std::string config_path, out_dir, target;
  bool force = false;
  unsigned threads = default_thread_count();

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--threads", threads, "Worker threads (default: $NLSDECAY_THREADS or 1)")->check(CLI::PositiveNumber);
  };

  auto* sim = app.add_subcommand("simulate", "Integrate a configured run and write its run directory");
  sim->add_option("--config", config_path, "Run configuration (JSON)")->required();
  sim->add_option("--out", out_dir, "Run directory (overrides output_dir)");
  sim->add_flag("--force", force, "Overwrite a run directory created by a different config");
  add_common(sim);

  auto* meas = app.add_subcommand("measure", "Compute observables, final state and Duhamel reports for a run");
  meas->add_option("run_dir", target, "Run directory");
  meas->add_option("--out", out_dir, "Run directory (alternative to the positional argument)");
  meas->add_option("--config", config_path, "Config whose observe block replaces the run's");
  meas->add_flag("--force", force, "Accept a config whose hash differs from the run's");
  add_common(meas);

  auto* fit = app.add_subcommand("fit", "Fit decay exponents and compare them with their targets");
  fit->add_option("run_dir", target, "Run directory");
  fit->add_option("--out", out_dir, "Run directory (alternative to the positional argument)");
  fit->add_option("--config", config_path, "Config whose fit block replaces the run's");
  fit->add_flag("--force", force, "Accept reports whose hash differs from the run's");
  add_common(fit);

  std::string suite = "all";
  auto* ver = app.add_subcommand("verify", "Run a built-in verification suite ('all' runs every suite)");
  ver->add_option("suite", suite, "Suite name");
  ver->add_option("--out", out_dir, "Also write the JSON summary to this file");
  ver->add_option("--config", config_path, "Unused; accepted for symmetry");
  ver->add_flag("--force", force, "Unused; accepted for symmetry");
  add_common(ver);

  auto* sweep = app.add_subcommand("sweep", "Run simulate, measure and fit for every config in a sweep file");
  sweep->add_option("--config", config_path, "Sweep file: {\"runs\": [{\"config\": PATH, \"out\": DIR}]}")->required();
  sweep->add_option("--out", out_dir, "Also write the JSON summary to this file");
  sweep->add_flag("--force", force, "Overwrite run directories created by different configs");
  add_common(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*sim) {
    return guarded(
        [&] {
          const auto cfg = load_run_config(config_path);
          const auto dir = resolve_run_dir(cfg, config_path, out_dir);
          const auto res = run_simulate(cfg, dir, force);
          std::printf("simulate: %zu snapshots in %s (config %s, mass drift %.3e, energy drift %.3e)\n",
                      res.snapshot_count, dir.string().c_str(), cfg.hash.c_str(), res.drift.mass, res.drift.energy);
        },
        std::cerr);
  }

  if (*meas || *fit) {
    const std::string dir = !target.empty() ? target : out_dir;
    if (dir.empty()) {
      std::cerr << "config error: a run directory is required\n";
      return kExitConfig;
    }
    return guarded(
        [&] {
          const auto override_cfg = optional_config(config_path);
          if (*meas) {
            for (const auto& p : run_measure(dir, override_cfg, force).written)
              std::printf("measure: wrote %s\n", p.string().c_str());
          } else {
            const auto cs = run_fit(dir, override_cfg, force);
            for (const auto& c : cs) {
              if (c.fit)
                std::printf("fit: %-18s exponent %+.6f (target %+.3f, tol %.3f) %s\n", c.target.name.c_str(),
                            c.fit->exponent, c.target.target, c.target.tolerance, to_string(c.status).c_str());
              else
                std::printf("fit: %-18s %s (%s)\n", c.target.name.c_str(), to_string(c.status).c_str(), c.message.c_str());
            }
            std::printf("fit: status %s, wrote %s\n", overall_rate_status(cs).c_str(),
                        (fs::path(dir) / "rates.json").string().c_str());
          }
        },
        std::cerr);
  }

  if (*ver) {
    bool passed = false;
    const int code = guarded(
        [&] {
          const auto summary = run_verify(suite, &passed);
          const auto text = summary.dump(2) + "\n";
          std::fwrite(text.data(), 1, text.size(), stdout);
          if (!out_dir.empty()) write_text_file(out_dir, text);
        },
        std::cerr);
    if (code != kExitOk) return code;
    return passed ? kExitOk : kExitFailure;
  }

  if (*sweep) {
    int worst = kExitOk;
    const int code = guarded(
        [&] {
          const auto outcomes = run_sweep(load_sweep(config_path), threads, force);
          nlohmann::json j;
          auto& arr = j["runs"] = nlohmann::json::array();
          for (const auto& o : outcomes) {
            arr.push_back({{"config", o.entry.config.string()},
                           {"out", o.entry.out.string()},
                           {"exit_code", o.exit_code},
                           {"message", o.message}});
            if (worst == kExitOk && o.exit_code != kExitOk) worst = o.exit_code;
          }
          j["status"] = worst == kExitOk ? "ok" : "failed";
          const auto text = j.dump(2) + "\n";
          std::fwrite(text.data(), 1, text.size(), stdout);
          if (!out_dir.empty()) write_text_file(out_dir, text);
        },
        std::cerr);
    return code != kExitOk ? code : worst;
  }
  return kExitConfig;
}
