// Runs every registered experiment at its default settings and checks the
// measured values at the acceptance tolerances. One line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "kummer/errors.hpp"
#include "kummer/harness.hpp"
#include "kummer/radial.hpp"

using namespace kummer;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [fail]");
  }
};

std::string fmt(const char* f, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

ExperimentResult run(const std::string& name) { return run_experiment(find_experiment(name).defaults); }

double metric(const ExperimentResult& r, const char* key) { return r.metrics.at(key).get<double>(); }

bool all_checks(const ExperimentResult& r) {
  for (const auto& c : r.checks)
    if (!c.get<bool>()) return false;
  return true;
}

bool rejects(RadialProblem p, double delta) {
  try {
    validate_delta(p, delta);
  } catch (const ConfigError&) {
    return true;
  }
  return false;
}

Outcome eh_ricci() {
  Outcome o;
  double v = metric(run("eh-ricci"), "max_relative");
  o.require(v < 1e-5, fmt("max relative Ric %.3g < 1e-5", v));
  return o;
}

Outcome ale_decay() {
  Outcome o;
  ExperimentResult r = run("ale-decay");
  double m = metric(r, "metric_exponent"), g = metric(r, "gradient_exponent");
  o.require(std::abs(m + 4) <= 0.1, fmt("metric exponent %.4f", m));
  o.require(std::abs(g + 3) <= 0.1, fmt("gradient exponent %.4f", g));
  return o;
}

Outcome scaling() {
  Outcome o;
  double v = metric(run("eh-scaling"), "sup_diff");
  o.require(v < 1e-12, fmt("sup diff %.3g < 1e-12", v));
  return o;
}

Outcome bolt() {
  Outcome o;
  ExperimentResult r = run("bolt-geometry");
  double v = metric(r, "volume_rel_err"), d = metric(r, "diameter_rel_err");
  o.require(v < 0.01, fmt("volume rel err %.3g", v));
  o.require(d < 0.01, fmt("diameter rel err %.3g", d));
  return o;
}

Outcome annulus() {
  Outcome o;
  const std::pair<const char*, double> sweeps[] = {
      {"annulus-decay", 2}, {"potential-decay", 2}, {"ricci-slope", 1}, {"q-decay", 2}};
  for (const auto& [name, target] : sweeps) {
    double s = metric(run(name), "slope");
    o.require(std::abs(s - target) <= 0.15, std::string(name) + fmt(" slope %.4f", s));
  }
  return o;
}

Outcome triples() {
  Outcome o;
  ExperimentResult r = run("triple-algebra");
  double su2 = metric(r, "su2_deviation"), eq = metric(r, "q_equivariance"), g = metric(r, "metric_reproduction");
  o.require(su2 < 1e-9, fmt("su2 %.3g", su2));
  o.require(eq < 1e-13, fmt("equivariance %.3g", eq));
  o.require(g < 1e-10, fmt("metric %.3g", g));
  return o;
}

Outcome matrix_map() {
  Outcome o;
  ExperimentResult r = run("matrix-map");
  double rt = metric(r, "roundtrip_residual"), d = metric(r, "derivative_error");
  o.require(rt <= 1e-12, fmt("round trip %.3g", rt));
  o.require(d <= 1e-6, fmt("derivative %.3g", d));
  return o;
}

Outcome fixed_point() {
  Outcome o;
  ExperimentResult r = run("fixed-point");
  double toy = metric(r, "toy_error"), slope = metric(r, "ma_slope");
  o.require(toy < 1e-12, fmt("toy error %.3g", toy));
  o.require(r.checks.at("toy_refuses_large_data").get<bool>(), "large data refused");
  o.require(r.checks.at("ma_smallness").get<bool>(), "MA smallness");
  o.require(std::abs(slope - 2) <= 0.2, fmt("MA refinement slope %.3f", slope));
  return o;
}

Outcome uniform_inverse() {
  Outcome o;
  double ratio = metric(run("uniform-inverse"), "ratio");
  o.require(ratio < 2, fmt("bound ratio %.3f < 2", ratio));
  o.require(rejects(RadialProblem::Scalar, -2.5) && rejects(RadialProblem::Scalar, 0.5) &&
                rejects(RadialProblem::HK, -1.5) && rejects(RadialProblem::HK, 0.0),
            "inadmissible delta rejected");
  o.require(!rejects(RadialProblem::Scalar, -1) && !rejects(RadialProblem::HK, -0.5), "admissible delta accepted");
  return o;
}

Outcome hodge() {
  Outcome o;
  ExperimentResult r = run("hodge-dirac");
  int full = r.metrics.at("full_kernel").get<int>(), even = r.metrics.at("even_kernel").get<int>();
  double orth = metric(r, "orthogonality");
  double h2 = std::pow(1.0 / find_experiment("hodge-dirac").defaults.grid_n, 2);
  o.require(full == 4, "full kernel " + std::to_string(full));
  o.require(even == 0, "even kernel " + std::to_string(even));
  o.require(orth <= h2, fmt("orthogonality %.3g", orth) + fmt(" <= h^2 = %.3g", h2));
  return o;
}

Outcome degeneration() {
  Outcome o;
  ExperimentResult r = run("degeneration");
  int c0 = r.metrics.at("parameter_count_0").get<int>(), c1 = r.metrics.at("parameter_count_1").get<int>(),
      c2 = r.metrics.at("parameter_count_2").get<int>();
  o.require(c0 == 58 && c1 == 10 + 3 * 3 && c2 == 10,
            "counts " + std::to_string(c0) + ", " + std::to_string(c1) + ", " + std::to_string(c2));
  o.require(r.checks.at("bubble_columns_exact").get<bool>(), "bubble columns exact");
  o.require(all_checks(r), "all checks");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"eh-ricci-flat", eh_ricci},     {"ale-decay", ale_decay},
      {"scaling-isometry", scaling},   {"bolt-geometry", bolt},
      {"annulus-estimates", annulus},  {"triple-algebra", triples},
      {"matrix-map", matrix_map},      {"fixed-point", fixed_point},
      {"uniform-inverse", uniform_inverse}, {"hodge-dirac", hodge},
      {"degeneration", degeneration}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2zu %-18s %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
