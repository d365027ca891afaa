#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "kummer/errors.hpp"
#include "kummer/harness.hpp"

using namespace kummer;

namespace {

std::string csv_of(const ExperimentResult& r) {
  std::ostringstream os;
  r.table.write_csv(os);
  return os.str();
}

Json report_with(Json metrics) {
  return Json{{"experiment", "annulus-decay"}, {"metrics", std::move(metrics)}};
}

}  // namespace

TEST_CASE("config overlay keeps defaults for absent fields") {
  ExperimentConfig base;
  base.experiment = "annulus-decay";
  base.eps = {0.04, 0.02};
  base.seed = 7;
  base.params = {{"tolerance", 0.15}};
  ExperimentConfig c = ExperimentConfig::from_json(Json{{"eps", {0.1, 0.05, 0.025}}, {"params", {{"extra", 1}}}}, base);
  CHECK(c.eps == std::vector<double>{0.1, 0.05, 0.025});
  CHECK(c.seed == 7u);
  CHECK(c.params["tolerance"] == 0.15);
  CHECK(c.params["extra"] == 1);

  ExperimentConfig round = ExperimentConfig::from_json(c.to_json(), ExperimentConfig{});
  CHECK(round.to_json() == c.to_json());
}

TEST_CASE("config rejects unknown fields and bad types") {
  ExperimentConfig base;
  CHECK_THROWS_AS(ExperimentConfig::from_json(Json{{"epsilon", 0.1}}, base), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(Json{{"eps", "small"}}, base), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(Json{{"samples", 0}}, base), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json(Json::array(), base), ConfigError);
}

TEST_CASE("table writes a header and shortest round-trip cells") {
  Table t;
  t.columns = {"eps", "sup_diff", "slope_running"};
  t.add({0.04, 1.0 / 3.0, ""});
  t.add({0.02, 2.5e-7, 2});
  std::ostringstream os;
  t.write_csv(os);
  CHECK(os.str() == "eps,sup_diff,slope_running\n0.04,0.3333333333333333,\n0.02,2.5e-07,2\n");
  CHECK_THROWS_AS(t.add({1.0}), ConfigError);
}

TEST_CASE("slope fit: exact powers, constants and noisy data") {
  std::vector<double> eps{0.04, 0.02, 0.01, 0.005};
  std::vector<double> v;
  for (double e : eps) v.push_back(3 * e * e);
  SlopeReport exact = fit_slope(eps, v);
  CHECK(exact.fit.slope == doctest::Approx(2).epsilon(1e-12));
  CHECK_FALSE(exact.flagged);

  SlopeReport flat = fit_slope(eps, std::vector<double>(4, 5.0));
  CHECK(std::abs(flat.fit.slope) < 1e-12);

  std::mt19937 rng(5);
  std::uniform_real_distribution<double> noise(-0.02, 0.02);
  std::vector<double> noisy;
  for (double e : eps) noisy.push_back(e * e * std::exp(noise(rng)));
  CHECK(std::abs(fit_slope(eps, noisy).fit.slope - 2) < 0.05);

  CHECK_THROWS_AS(fit_slope({0.1, 0.05}, {1, 2}), ConfigError);
  CHECK_THROWS_AS(fit_slope({0.1, 0.05, 0.02}, {1, 2}), ConfigError);
}

TEST_CASE("slope fit flags scattered data") {
  SlopeReport r = fit_slope({0.04, 0.02, 0.01, 0.005}, {1, 0.01, 1, 0.01});
  CHECK(r.flagged);
}

TEST_CASE("baseline comparison") {
  Json base = report_with({{"slope", 2.0}, {"fit_residual", 1e-3}});

  CHECK(compare_baseline(base, base).pass);
  CHECK(compare_baseline(report_with({{"slope", 2.002}, {"fit_residual", 1.001e-3}}), base, 1e-2).pass);

  BaselineDiff off = compare_baseline(report_with({{"slope", 2.5}, {"fit_residual", 1e-3}}), base, 1e-2);
  CHECK_FALSE(off.pass);
  REQUIRE(off.failures.size() == 1);
  CHECK(off.failures[0].rfind("metrics.slope:", 0) == 0);

  BaselineDiff missing = compare_baseline(report_with({{"slope", 2.0}}), base);
  CHECK_FALSE(missing.pass);
  REQUIRE(missing.failures.size() == 1);
  CHECK(missing.failures[0].find("fit_residual") != std::string::npos);

  // tiny values are compared against the absolute floor
  CHECK(compare_baseline(report_with({{"slope", 2.0}, {"fit_residual", 1e-3}, {"z", 1e-15}}),
                         report_with({{"z", 3e-15}}))
            .pass);

  Json other = base;
  other["experiment"] = "q-decay";
  CHECK_THROWS_AS(compare_baseline(other, base), ConfigError);
}

TEST_CASE("registry holds every experiment") {
  const auto& reg = experiment_registry();
  for (const char* n : {"eh-ricci", "ale-decay", "eh-scaling", "bolt-geometry", "annulus-decay", "potential-decay",
                        "ricci-slope", "q-decay", "triple-algebra", "matrix-map", "fixed-point", "uniform-inverse",
                        "hodge-dirac", "hk-solve", "degeneration"}) {
    INFO(n);
    REQUIRE(reg.count(n) == 1);
    CHECK(reg.at(n).defaults.experiment == n);
    CHECK_FALSE(reg.at(n).description.empty());
  }
  CHECK_THROWS_AS(find_experiment("no-such-thing"), ConfigError);
}

TEST_CASE("annulus sweep has the fixed columns and is deterministic") {
  ExperimentConfig c = find_experiment("annulus-decay").defaults;
  ExperimentResult a = run_experiment(c);
  ExperimentResult b = run_experiment(c);
  CHECK(a.table.columns == std::vector<std::string>{"eps", "sup_diff", "slope_running"});
  CHECK(a.table.rows.size() == c.eps.size());
  CHECK(csv_of(a) == csv_of(b));
  CHECK(a.pass);
  CHECK(std::abs(a.metrics["slope"].get<double>() - 2) < 0.15);
}

TEST_CASE("seeded sampling experiments repeat byte for byte") {
  ExperimentConfig c = find_experiment("eh-ricci").defaults;
  CHECK(csv_of(run_experiment(c)) == csv_of(run_experiment(c)));
  ExperimentConfig d = c;
  d.seed = c.seed + 1;
  CHECK(csv_of(run_experiment(c)) != csv_of(run_experiment(d)));
}

TEST_CASE("validation rejects configs before running") {
  ExperimentConfig c = find_experiment("annulus-decay").defaults;
  c.eps = {0.04, 0.02};
  CHECK_THROWS_AS(run_experiment(c), ConfigError);
  ExperimentConfig u = find_experiment("uniform-inverse").defaults;
  u.delta = 0.5;
  CHECK_THROWS_AS(run_experiment(u), ConfigError);
}

TEST_CASE("error records carry the kind and history") {
  ConvergenceError e("did not converge", {0.5, 0.25});
  Json rec = write_error("fixed-point", e, "");
  CHECK(rec["error"]["kind"] == "convergence");
  CHECK(rec["error"]["history"].size() == 2);
  CHECK(rec["pass"] == false);
  CHECK(write_error("x", ConfigError("bad"), "")["error"]["kind"] == "config");
}
