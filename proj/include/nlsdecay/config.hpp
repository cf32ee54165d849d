#pragma once
// JSON run configuration. Schema (all blocks optional unless noted):
//
// {
//   "run_id": "two-bubble",                 string, default "run"
//   "seed": 0,                              unsigned, used by randomized suites only
//   "output_dir": "runs/two-bubble",        overridden by --out
//   "geometry": {                           required
//     "mode": "radial-3d" | "periodic-cartesian",
//     "dimension": 1,                       default 1 for radial-3d
//     "sizes": [4096], "lengths": [200]
//   },
//   "profile": {
//     "base": {"amplitude": 1.0, "width": 1.0},
//     "bubbles": [{"weight": 1.0, "delay": 10}, {"weight": 0.25, "delay": 100}]
//   },
//   "initial": {"snapshot": "path/to/file.nlsf"},   replaces "profile"
//   "solver": {                             required
//     "dt": 0.005, "t_end": 50, "snapshot_stride": 200,
//     "dealias": true, "nonlinear": true,
//     "sponge": {"start_radius": 150, "strength": 1.0},
//     "mass_drift_limit": 1e-8, "energy_drift_limit": 1e-2
//   },
//   "observe": {
//     "norms": ["hdot0.5", "l6"],
//     "probe_times": [100, 200],
//     "tail_starts": [10, 20, 50],
//     "duhamel": {"t": 20, "delay": 10, "M": 1}   or {"t": 20, "edges": [...]}
//   },
//   "fit": {
//     "targets": [{"name": "linf_decay", "series": "linf", "window": [10, 100],
//                  "target": -1.5, "tolerance": 0.1, "floor_factor": 1.0}]
//   }
// }
//
// The config hash is FNV-1a (64 bit) over the compact, key-sorted dump of the
// document with "output_dir" and "config_hash" removed.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlsdecay/errors.hpp"
#include "nlsdecay/grid.hpp"
#include "nlsdecay/profiles.hpp"
#include "nlsdecay/propagate.hpp"
#include "nlsdecay/observe.hpp"
#include "nlsdecay/ratefit.hpp"
#include "nlsdecay/report.hpp"

namespace nlsd {

using json = nlohmann::json;

struct DuhamelConfig {
  double t = 0.0;
  std::optional<double> delay;
  std::optional<double> m;
  std::vector<double> edges;
};

struct ObserveConfig {
  std::vector<std::string> norms;
  std::vector<double> probe_times;
  std::vector<double> tail_starts;
  std::optional<DuhamelConfig> duhamel;
};

struct FitConfig {
  std::vector<RateTarget> targets;  ///< empty: defaults derived from the profile
};

struct RunConfig {
  std::string run_id = "run";
  std::uint64_t seed = 0;
  std::string output_dir;
  Geometry geometry;
  ProfileSpec profile;
  std::optional<std::filesystem::path> initial_snapshot;
  SolverConfig solver;
  ObserveConfig observe;
  FitConfig fit;
  json document;     ///< parsed source, echoed into the run directory
  std::string hash;  ///< 16 hex digits

  [[nodiscard]] double max_delay() const {
    double a = 0.0;
    for (const auto& b : profile.bubbles) a = std::max(a, b.delay);
    return a;
  }
};

inline std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

inline std::string config_hash(const json& doc) {
  json copy = doc;
  if (copy.is_object()) {
    copy.erase("output_dir");
    copy.erase("config_hash");
  }
  return fnv1a_hex(copy.dump());
}

namespace detail {

/// Maps JSON key paths back to source lines for error messages.
class ConfigLocator {
 public:
  ConfigLocator(std::string text, std::string source) : text_(std::move(text)), source_(std::move(source)) {}

  [[nodiscard]] std::size_t line_of_offset(std::size_t offset) const {
    std::size_t line = 1;
    for (std::size_t i = 0; i < offset && i < text_.size(); ++i)
      if (text_[i] == '\n') ++line;
    return line;
  }

  /// Line of the last key in `path`, searching each key after its parent.
  [[nodiscard]] std::size_t line_of(const std::vector<std::string>& path) const {
    std::size_t pos = 0;
    std::size_t found = std::string::npos;
    for (const auto& key : path) {
      const auto at = text_.find('"' + key + '"', pos);
      if (at == std::string::npos) break;
      found = at;
      pos = at + key.size() + 2;
    }
    return found == std::string::npos ? 1 : line_of_offset(found);
  }

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& msg) const {
    throw ConfigError(source_ + ":" + std::to_string(line_of(path)) + ": " + msg);
  }

  [[nodiscard]] const std::string& source() const { return source_; }

 private:
  std::string text_;
  std::string source_;
};

inline std::string path_name(const std::vector<std::string>& path) {
  std::string s;
  for (const auto& p : path) s += (s.empty() ? "" : ".") + p;
  return s;
}

class Reader {
 public:
  Reader(const ConfigLocator& loc, const json& node, std::vector<std::string> path)
      : loc_(loc), node_(node), path_(std::move(path)) {
    if (!node_.is_object()) loc_.fail(path_, "'" + path_name(path_) + "' must be an object");
  }

  [[nodiscard]] bool has(const std::string& key) const { return node_.contains(key); }

  [[nodiscard]] Reader child(const std::string& key) const { return Reader(loc_, node_.at(key), sub(key)); }

  [[nodiscard]] std::vector<std::string> sub(const std::string& key) const {
    auto p = path_;
    p.push_back(key);
    return p;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const { loc_.fail(sub(key), msg); }

  void allow_only(std::initializer_list<const char*> keys) const {
    for (const auto& [k, v] : node_.items()) {
      bool ok = false;
      for (const char* allowed : keys) ok = ok || k == allowed;
      if (!ok) fail(k, "unknown key '" + path_name(sub(k)) + "'");
    }
  }

  [[nodiscard]] double number(const std::string& key, std::optional<double> fallback = std::nullopt) const {
    if (!has(key)) {
      if (fallback) return *fallback;
      loc_.fail(path_, "missing required key '" + path_name(sub(key)) + "'");
    }
    const auto& v = node_.at(key);
    if (!v.is_number()) fail(key, "'" + path_name(sub(key)) + "' must be a number");
    return v.get<double>();
  }

  [[nodiscard]] std::uint64_t unsigned_int(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const auto& v = node_.at(key);
    if (!v.is_number_unsigned()) fail(key, "'" + path_name(sub(key)) + "' must be a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  [[nodiscard]] bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = node_.at(key);
    if (!v.is_boolean()) fail(key, "'" + path_name(sub(key)) + "' must be true or false");
    return v.get<bool>();
  }

  [[nodiscard]] std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) const {
    if (!has(key)) {
      if (fallback) return *fallback;
      loc_.fail(path_, "missing required key '" + path_name(sub(key)) + "'");
    }
    const auto& v = node_.at(key);
    if (!v.is_string()) fail(key, "'" + path_name(sub(key)) + "' must be a string");
    return v.get<std::string>();
  }

  [[nodiscard]] std::vector<double> numbers(const std::string& key) const {
    if (!has(key)) return {};
    const auto& v = node_.at(key);
    if (!v.is_array()) fail(key, "'" + path_name(sub(key)) + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) fail(key, "'" + path_name(sub(key)) + "' must contain only numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  [[nodiscard]] std::vector<std::string> strings(const std::string& key) const {
    if (!has(key)) return {};
    const auto& v = node_.at(key);
    if (!v.is_array()) fail(key, "'" + path_name(sub(key)) + "' must be an array of strings");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) fail(key, "'" + path_name(sub(key)) + "' must contain only strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  [[nodiscard]] const json& raw(const std::string& key) const { return node_.at(key); }
  [[nodiscard]] const ConfigLocator& locator() const { return loc_; }

 private:
  const ConfigLocator& loc_;
  const json& node_;
  std::vector<std::string> path_;
};

inline bool is_snapshot_time(double t, const SolverConfig& s) {
  const double steps = t / s.dt;
  const double n = std::round(steps);
  if (std::abs(n - steps) > 1e-9 * std::max(1.0, steps)) return false;
  const auto k = static_cast<std::size_t>(n);
  return k % s.snapshot_stride == 0 || k == s.step_count();
}

}  // namespace detail

inline RunConfig parse_run_config(const std::string& text, const std::string& source = "config",
                                  const std::filesystem::path& base_dir = {}) {
  detail::ConfigLocator loc(text, source);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ":" + std::to_string(loc.line_of_offset(e.byte > 0 ? e.byte - 1 : 0)) +
                      ": malformed JSON: " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(source + ":1: configuration must be a JSON object");

  RunConfig cfg;
  cfg.document = doc;
  cfg.hash = config_hash(doc);
  detail::Reader top(loc, cfg.document, {});
  top.allow_only({"run_id", "seed", "output_dir", "geometry", "profile", "initial", "solver", "observe", "fit",
                  "config_hash"});
  cfg.run_id = top.text("run_id", std::string("run"));
  cfg.seed = top.unsigned_int("seed", 0);
  cfg.output_dir = top.text("output_dir", std::string());

  // geometry
  if (!top.has("geometry")) loc.fail({}, "missing required block 'geometry'");
  {
    auto g = top.child("geometry");
    g.allow_only({"mode", "dimension", "sizes", "lengths"});
    Mode mode;
    try {
      mode = mode_from_string(g.text("mode", std::string("periodic-cartesian")));
    } catch (const ConfigError& e) {
      g.fail("mode", e.what());
    }
    const auto sizes_d = g.numbers("sizes");
    const auto lengths = g.numbers("lengths");
    const int dim = static_cast<int>(g.number("dimension", static_cast<double>(sizes_d.size())));
    std::vector<std::size_t> sizes;
    for (double s : sizes_d) {
      if (s < 0 || s != std::floor(s)) g.fail("sizes", "'geometry.sizes' must hold nonnegative integers");
      sizes.push_back(static_cast<std::size_t>(s));
    }
    try {
      cfg.geometry = make_geometry(dim, sizes, lengths, mode);
    } catch (const ConfigError& e) {
      g.fail("sizes", e.what());
    }
  }

  // profile or initial snapshot
  if (top.has("profile") && top.has("initial"))
    top.fail("initial", "'initial' and 'profile' are mutually exclusive");
  cfg.profile.geometry = cfg.geometry;
  cfg.profile.bubbles = inverse_square_bubbles({10.0, 100.0});
  if (top.has("profile")) {
    auto p = top.child("profile");
    p.allow_only({"base", "bubbles"});
    if (p.has("base")) {
      auto b = p.child("base");
      b.allow_only({"kind", "amplitude", "width"});
      if (b.text("kind", std::string("gaussian")) != "gaussian")
        b.fail("kind", "only the 'gaussian' base bump is supported");
      cfg.profile.base.amplitude = b.number("amplitude", 1.0);
      cfg.profile.base.width = b.number("width", 1.0);
    }
    if (p.has("bubbles")) {
      const auto& arr = p.raw("bubbles");
      if (!arr.is_array()) p.fail("bubbles", "'profile.bubbles' must be an array");
      cfg.profile.bubbles.clear();
      for (const auto& item : arr) {
        detail::Reader bub(loc, item, p.sub("bubbles"));
        bub.allow_only({"weight", "delay"});
        cfg.profile.bubbles.push_back({bub.number("weight"), bub.number("delay")});
      }
    }
    try {
      cfg.profile.validate();
    } catch (const ConfigError& e) {
      p.fail("bubbles", e.what());
    }
  }
  if (top.has("initial")) {
    auto in = top.child("initial");
    in.allow_only({"snapshot"});
    std::filesystem::path path = in.text("snapshot");
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    cfg.initial_snapshot = path;
    cfg.profile.bubbles.clear();
  }

  // solver
  if (!top.has("solver")) loc.fail({}, "missing required block 'solver'");
  {
    auto s = top.child("solver");
    s.allow_only({"dt", "t_end", "snapshot_stride", "dealias", "nonlinear", "sponge", "mass_drift_limit",
                  "energy_drift_limit", "splitting"});
    if (s.text("splitting", std::string("strang")) != "strang")
      s.fail("splitting", "only 'strang' splitting is supported");
    cfg.solver.dt = s.number("dt");
    cfg.solver.t_end = s.number("t_end");
    const double stride = s.number("snapshot_stride", 1.0);
    if (stride < 1 || stride != std::floor(stride)) s.fail("snapshot_stride", "snapshot_stride must be an integer >= 1");
    cfg.solver.snapshot_stride = static_cast<std::size_t>(stride);
    cfg.solver.dealias = s.flag("dealias", true);
    cfg.solver.nonlinear = s.flag("nonlinear", true);
    cfg.solver.mass_drift_limit = s.number("mass_drift_limit", cfg.solver.mass_drift_limit);
    cfg.solver.energy_drift_limit = s.number("energy_drift_limit", cfg.solver.energy_drift_limit);
    if (s.has("sponge")) {
      auto sp = s.child("sponge");
      sp.allow_only({"start_radius", "strength"});
      cfg.solver.sponge = Sponge{sp.number("start_radius"), sp.number("strength")};
    }
    try {
      cfg.solver.validate(cfg.geometry);
    } catch (const ConfigError& e) {
      s.fail("dt", e.what());
    }
  }

  const double t_end = cfg.solver.t_end;
  auto check_time = [&](const detail::Reader& r, const std::string& key, double t, const char* what) {
    if (t > t_end + 1e-9 * std::max(1.0, t_end))
      r.fail(key, std::string(what) + " " + std::to_string(t) + " exceeds solver.t_end " + std::to_string(t_end));
    if (t < 0.0) r.fail(key, std::string(what) + " must be nonnegative");
  };

  // observe
  if (top.has("observe")) {
    auto o = top.child("observe");
    o.allow_only({"norms", "probe_times", "tail_starts", "duhamel"});
    cfg.observe.norms = o.strings("norms");
    for (const auto& n : cfg.observe.norms) {
      try {
        (void)parse_norm_spec(n);
      } catch (const ConfigError& e) {
        o.fail("norms", e.what());
      }
    }
    cfg.observe.probe_times = o.numbers("probe_times");
    if (!cfg.observe.probe_times.empty() && cfg.observe.probe_times.size() != 2)
      o.fail("probe_times", "'observe.probe_times' must hold exactly two times [t1, t2]");
    for (double t : cfg.observe.probe_times) {
      check_time(o, "probe_times", t, "probe time");
      if (!detail::is_snapshot_time(t, cfg.solver))
        o.fail("probe_times", "probe time " + std::to_string(t) + " is not a snapshot time");
    }
    if (cfg.observe.probe_times.size() == 2 && !(cfg.observe.probe_times[0] < cfg.observe.probe_times[1]))
      o.fail("probe_times", "probe times must satisfy t1 < t2");
    cfg.observe.tail_starts = o.numbers("tail_starts");
    for (double s : cfg.observe.tail_starts) check_time(o, "tail_starts", s, "tail start");
    if (o.has("duhamel")) {
      auto d = o.child("duhamel");
      d.allow_only({"t", "delay", "M", "edges"});
      DuhamelConfig dc;
      dc.t = d.number("t");
      check_time(d, "t", dc.t, "Duhamel time");
      dc.edges = d.numbers("edges");
      if (dc.edges.empty()) {
        dc.delay = d.number("delay", cfg.max_delay() > 0 ? std::optional<double>(cfg.profile.bubbles.front().delay)
                                                          : std::nullopt);
        dc.m = d.number("M", 1.0);
      } else {
        for (double e : dc.edges) check_time(d, "edges", e, "Duhamel edge");
      }
      cfg.observe.duhamel = dc;
    }
  }

  // fit
  if (top.has("fit")) {
    auto f = top.child("fit");
    f.allow_only({"targets"});
    if (f.has("targets")) {
      const auto& arr = f.raw("targets");
      if (!arr.is_array()) f.fail("targets", "'fit.targets' must be an array");
      for (const auto& item : arr) {
        detail::Reader t(loc, item, f.sub("targets"));
        t.allow_only({"name", "series", "window", "target", "tolerance", "floor_factor"});
        RateTarget rt;
        rt.series = t.text("series");
        rt.name = t.text("name", rt.series);
        const auto w = t.numbers("window");
        if (w.size() != 2 || !(w[0] > 0.0) || !(w[0] < w[1]))
          t.fail("window", "'window' must be [t_min, t_max] with 0 < t_min < t_max");
        rt.t_min = w[0];
        rt.t_max = w[1];
        rt.target = t.number("target");
        rt.tolerance = t.number("tolerance", 0.1);
        rt.floor_factor = t.number("floor_factor", rt.series == "convergence" ? 10.0 : 1.0);
        cfg.fit.targets.push_back(rt);
      }
    }
  }
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_run_config(ss.str(), path.string(), path.parent_path());
}

/// Targets used when the config lists none: the default set, fitted from
/// twice the largest delay (a twentieth of the run without delays) to t_end.
inline std::vector<RateTarget> default_targets_for(const RunConfig& cfg) {
  if (!cfg.fit.targets.empty()) return cfg.fit.targets;
  const double a = cfg.max_delay();
  const double t_min = a > 0.0 ? 2.0 * a : cfg.solver.t_end / 20.0;
  return default_rate_targets(t_min, cfg.solver.t_end);
}

}  // namespace nlsd
