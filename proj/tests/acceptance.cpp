// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "nlsdecay/verify.hpp"

using namespace nlsd;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string compact(const nlohmann::json& j) { return j.dump(); }

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

Outcome from_suite(const SuiteResult& r) { return {r.pass, compact(r.metrics)}; }

// Pointwise closed form of the free Schrodinger flow from exp(-r^2/2) in 3D.
cplx gaussian_free(double r, double t) {
  const cplx z(1.0, 2.0 * t);
  return std::pow(z, -1.5) * std::exp(-r * r / (2.0 * z));
}

// Ordinary least squares on (log t, log y), written out independently of the library fitter.
double ols_slope(const std::vector<Sample>& s) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [t, y] : s) {
    const double x = std::log(t), ly = std::log(y);
    sx += x;
    sy += ly;
    sxx += x * x;
    sxy += x * ly;
  }
  const double n = static_cast<double>(s.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::string run_cli(const std::string& args, const std::filesystem::path& out) {
  const std::string cmd = std::string(NLSDECAY_CLI) + " " + args + " > " + out.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return "<exit " + std::to_string(status) + ">";
  return read_text_file(out);
}

}  // namespace

int main() {
  VerifyContext ctx;
  int failures = 0;

  auto report = [&](int id, const std::string& name, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %d (%s) [%.1fs]: %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), seconds_since(t0),
                o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "conservation", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = suite_conservation(ctx);
    const double elapsed = seconds_since(t0);
    Outcome o = from_suite(r);
    o.pass = o.pass && elapsed <= 120.0;
    o.detail += " runtime_s=" + sci(elapsed);
    return o;
  });

  report(2, "linear propagator", [&] {
    Outcome o = from_suite(suite_propagator(ctx));
    // Independent pointwise check of the whole profile against the closed form.
    const auto grid = make_grid(verify_detail::radial(4096, 200.0));
    const Field phi = make_base({1.0, 1.0}, grid);
    const auto r = grid->coordinates(0);
    double worst = 0.0;
    for (double t : {0.0, 1.0, 5.0, 12.5, 20.0}) {
      const auto u = physical_values(free_propagate(phi, t));
      const double scale = std::pow(1.0 + 4.0 * t * t, -0.75);
      for (std::size_t j = 0; j < u.size(); ++j)
        worst = std::max(worst, std::abs(u[j] - gaussian_free(r[j], t)) / scale);
    }
    o.pass = o.pass && worst <= 1e-5;
    o.detail += " pointwise_oracle_error=" + sci(worst);
    return o;
  });

  report(3, "dispersive exponent", [&] { return from_suite(suite_dispersive(ctx)); });

  report(4, "single-bubble refocusing", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o = from_suite(suite_refocusing(ctx));
    const double elapsed = seconds_since(t0);
    o.pass = o.pass && elapsed <= 600.0;
    o.detail += " runtime_s=" + sci(elapsed);
    return o;
  });

  report(5, "interpolated Lp decay", [&] {
    Outcome o = from_suite(suite_lp_decay(ctx));
    // Targets recomputed from the scaling -3(1/2 - 1/p).
    const double l4 = -3.0 * (0.5 - 0.25), linf = -1.5;
    o.pass = o.pass && std::abs(lp_decay_exponent(4.0) - l4) < 1e-15 && lp_decay_exponent(INFINITY) == linf;
    return o;
  });

  report(6, "convergence rate", [&] { return from_suite(suite_convergence_rate(ctx)); });
  report(7, "tail rate", [&] { return from_suite(suite_tail_rate(ctx)); });
  report(8, "delayed bump", [&] {
    const auto r = suite_delayed_bump(ctx);
    Outcome o = from_suite(r);
    for (const auto& n : r.notes) o.detail += " note: " + n;
    return o;
  });

  report(9, "interpolation property suite", [&] {
    const auto a = suite_interpolation(ctx);
    const auto b = suite_interpolation(ctx);
    Outcome o = from_suite(a);
    const bool same = a.to_json().dump() == b.to_json().dump();
    o.pass = o.pass && same;
    o.detail += same ? " deterministic=yes" : " deterministic=no";
    return o;
  });

  report(10, "Duhamel reconstruction", [&] { return from_suite(suite_duhamel(ctx)); });

  report(11, "rate fitter", [&] {
    Outcome o = from_suite(suite_ratefit(ctx));
    // Library fitter against the hand-written least squares on a two-decade power law.
    std::vector<Sample> s;
    for (int i = 0; i < 64; ++i) {
      const double t = std::pow(10.0, 2.0 * i / 63.0);
      s.emplace_back(t, 0.3 * std::pow(t, -1.7));
    }
    const double lib = fit_power_law(s, 1.0, 100.0).exponent;
    const double err = std::max(std::abs(lib - ols_slope(s)), std::abs(lib + 1.7));
    const auto tmp = std::filesystem::temp_directory_path();
    const auto j1 = run_verify("ratefit").dump(2);
    const auto j2 = run_verify("ratefit").dump(2);
    const auto c1 = run_cli("verify ratefit", tmp / "nlsdecay_acc_a.json");
    const auto c2 = run_cli("verify ratefit", tmp / "nlsdecay_acc_b.json");
    const bool identical = j1 == j2 && c1 == c2 && c1.rfind("<exit", 0) != 0;
    o.pass = o.pass && err <= 1e-12 && identical;
    o.detail += " oracle_error=" + sci(err) + (identical ? " byte_identical=yes" : " byte_identical=no");
    return o;
  });

  report(12, "solver order", [&] { return from_suite(suite_solver_order(ctx)); });

  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
