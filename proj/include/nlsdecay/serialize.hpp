#pragma once
// Text formats written into run directories. Every file carries the config
// hash: CSV files on a leading "# config_hash=<hex>" comment line, JSON files
// in a "config_hash" member. Floats in CSV use 17 significant digits.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlsdecay/errors.hpp"
#include "nlsdecay/observe.hpp"
#include "nlsdecay/propagate.hpp"
#include "nlsdecay/ratefit.hpp"
#include "nlsdecay/report.hpp"

namespace nlsd {

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw IoError("failed writing " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
  try {
    return nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

inline void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// CSV

inline std::string observables_csv(const ObservableSeries& s) {
  std::string out = "# config_hash=" + s.config_hash + "\n";
  out += "t";
  for (const auto& c : s.columns) out += "," + c;
  out += "\n";
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    out += format_g17(s.times[i]);
    for (double v : s.rows[i]) out += "," + format_g17(v);
    out += "\n";
  }
  return out;
}

inline std::string conservation_csv(const Trajectory& traj, const std::string& hash) {
  std::string out = "# config_hash=" + hash + "\n";
  if (traj.sponge_active) out += "# sponge_active=1 (conservation not expected)\n";
  out += "step,t,mass,energy\n";
  for (const auto& r : traj.conservation) {
    out += std::to_string(r.step) + "," + format_g17(r.time) + "," + format_g17(r.mass) + "," +
           format_g17(r.energy) + "\n";
  }
  return out;
}

namespace detail {
inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}
}  // namespace detail

/// Parses an observables CSV (header, comment lines, 17-digit values).
inline ObservableSeries parse_observables_csv(const std::string& text, const std::string& source = "observables") {
  ObservableSeries s;
  std::istringstream is(text);
  std::string line;
  bool header = false;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string key = "# config_hash=";
      if (line.rfind(key, 0) == 0) s.config_hash = line.substr(key.size());
      continue;
    }
    auto cells = detail::split_csv_line(line);
    if (!header) {
      if (cells.empty() || cells[0] != "t") throw IoError(source + ":" + std::to_string(lineno) + ": missing header");
      s.columns.assign(cells.begin() + 1, cells.end());
      header = true;
      continue;
    }
    if (cells.size() != s.columns.size() + 1)
      throw IoError(source + ":" + std::to_string(lineno) + ": wrong number of fields");
    std::vector<double> row;
    try {
      s.times.push_back(std::stod(cells[0]));
      for (std::size_t c = 1; c < cells.size(); ++c) row.push_back(std::stod(cells[c]));
    } catch (const std::exception&) {
      throw IoError(source + ":" + std::to_string(lineno) + ": malformed number");
    }
    s.rows.push_back(std::move(row));
  }
  if (!header) throw IoError(source + ": empty observables file");
  return s;
}

inline ObservableSeries read_observables_csv(const std::filesystem::path& path) {
  return parse_observables_csv(read_text_file(path), path.string());
}

// ---------------------------------------------------------------------------
// JSON reports

inline nlohmann::json scatter_json(const ScatterReport& rep, const std::string& hash, const std::string& run_id) {
  nlohmann::json j;
  j["config_hash"] = hash;
  j["run_id"] = run_id;
  j["probe_t1"] = rep.probe_t1;
  j["probe_t2"] = rep.probe_t2;
  j["cauchy_gap"] = rep.cauchy_gap;
  j["u_plus_hdot_half"] = rep.u_plus_hdot_half;
  j["resolution_floor"] = rep.resolution_floor();
  j["truncation_horizon"] = rep.truncation_horizon;
  j["sponge_active"] = rep.sponge_active;
  j["u_plus_file"] = "u_plus.nlsf";
  auto& conv = j["convergence"] = nlohmann::json::array();
  for (const auto& p : rep.convergence_series) conv.push_back({{"t", p.t}, {"distance", p.distance}, {"at_floor", p.at_floor}});
  auto& tail = j["tail"] = nlohmann::json::array();
  for (const auto& p : rep.tail_series) tail.push_back({{"s", p.s}, {"value", p.value}});
  return j;
}

/// Series and floor recovered from scatter.json, enough for rate fitting.
struct ScatterSeries {
  std::string config_hash;
  double resolution_floor = 0.0;
  std::vector<Sample> convergence;
  std::vector<Sample> tail;
};

inline ScatterSeries parse_scatter_json(const nlohmann::json& j, const std::string& source = "scatter.json") {
  try {
    ScatterSeries s;
    s.config_hash = j.at("config_hash").get<std::string>();
    s.resolution_floor = j.at("resolution_floor").get<double>();
    for (const auto& p : j.at("convergence")) s.convergence.emplace_back(p.at("t").get<double>(), p.at("distance").get<double>());
    for (const auto& p : j.at("tail")) s.tail.emplace_back(p.at("s").get<double>(), p.at("value").get<double>());
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(source + ": " + e.what());
  }
}

inline nlohmann::json duhamel_json(const DuhamelReport& rep, const std::string& hash, const std::string& run_id) {
  nlohmann::json j;
  j["config_hash"] = hash;
  j["run_id"] = run_id;
  j["t"] = rep.t;
  j["edges"] = rep.edges;
  std::vector<double> window_l2;
  for (const auto& w : rep.windows) window_l2.push_back(norm_l2(w));
  j["window_l2"] = window_l2;
  j["linear_l2"] = norm_l2(rep.linear);
  j["solution_l2"] = rep.solution_l2;
  j["residual"] = rep.residual;
  j["relative_residual"] = rep.relative_residual();
  return j;
}

inline nlohmann::json rate_comparison_json(const RateComparison& c) {
  nlohmann::json j;
  j["name"] = c.target.name;
  j["series"] = c.target.series;
  j["window"] = {c.target.t_min, c.target.t_max};
  j["target"] = c.target.target;
  j["tolerance"] = c.target.tolerance;
  j["status"] = to_string(c.status);
  j["excluded_below_floor"] = c.excluded_below_floor;
  if (c.fit) {
    j["exponent"] = c.fit->exponent;
    j["log_amplitude"] = c.fit->log_amplitude;
    j["residual_rms"] = c.fit->residual_rms;
    j["stderr_exponent"] = c.fit->stderr_exponent;
    j["point_count"] = c.fit->point_count;
    j["fit_t_min"] = c.fit->t_min;
    j["fit_t_max"] = c.fit->t_max;
  } else {
    j["exponent"] = nullptr;
  }
  if (!c.message.empty()) j["message"] = c.message;
  return j;
}

/// Overall status: "pass" when every comparison passes, otherwise the first
/// non-passing status in the order fail, no_fit, below_floor.
inline std::string overall_rate_status(const std::vector<RateComparison>& cs) {
  for (auto s : {RateStatus::fail, RateStatus::no_fit, RateStatus::below_floor})
    for (const auto& c : cs)
      if (c.status == s) return to_string(s);
  return "pass";
}

inline nlohmann::json rates_json(const std::vector<RateComparison>& cs, const std::string& hash,
                                 const std::string& run_id) {
  nlohmann::json j;
  j["config_hash"] = hash;
  j["run_id"] = run_id;
  j["status"] = overall_rate_status(cs);
  auto& arr = j["comparisons"] = nlohmann::json::array();
  for (const auto& c : cs) arr.push_back(rate_comparison_json(c));
  return j;
}

}  // namespace nlsd
