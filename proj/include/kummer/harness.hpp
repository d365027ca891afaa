#pragma once
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "kummer/fit.hpp"

namespace kummer {

using Json = nlohmann::json;

// Settings for one experiment. Fields absent from a config file keep the
// experiment's defaults; `params` carries experiment-specific extras.
struct ExperimentConfig {
  std::string experiment;
  std::vector<double> eps;
  std::vector<double> scales;  // EH scale parameters s
  double delta = -1.0;
  int grid_n = 16;
  int samples = 50;
  unsigned seed = 1;
  Json params = Json::object();

  Json to_json() const;
  // Overlays the fields present in j onto base. ConfigError on bad types.
  static ExperimentConfig from_json(const Json& j, const ExperimentConfig& base);
};

// CSV body: header row, then one row per record. Cells are numbers or
// strings; empty strings mark missing values.
struct Table {
  std::vector<std::string> columns;
  std::vector<Json> rows;  // arrays, one entry per column

  void add(Json row);
  void write_csv(std::ostream& os) const;
};

struct ExperimentResult {
  std::string experiment;
  Table table;
  Json metrics = Json::object();  // numbers compared against baselines
  Json checks = Json::object();   // name -> bool
  bool pass = true;

  void check(const std::string& name, bool ok);
  Json summary(const ExperimentConfig& config) const;
};

struct Experiment {
  std::string name;
  std::string description;
  ExperimentConfig defaults;
  std::function<void(const ExperimentConfig&)> validate;  // ConfigError
  std::function<ExperimentResult(const ExperimentConfig&)> run;
};

const std::map<std::string, Experiment>& experiment_registry();
const Experiment& find_experiment(const std::string& name);  // ConfigError when unknown

// Validates, runs and returns the result; module errors propagate.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Writes <dir>/<name>.csv and <dir>/<name>.json; returns the summary.
Json write_report(const ExperimentResult& result, const ExperimentConfig& config, const std::string& dir);
// Structured record for a failed run, written to <dir>/<name>.error.json.
Json write_error(const std::string& experiment, const std::exception& e, const std::string& dir);

// Power-law fit of (scale, value) points, flagged when the log-log
// residual exceeds max_residual. ConfigError with fewer than 3 points.
struct SlopeReport {
  SlopeFit fit;
  bool flagged = false;
};
SlopeReport fit_slope(const std::vector<double>& scale, const std::vector<double>& value, double max_residual = 0.05);

struct BaselineDiff {
  bool pass = true;
  std::vector<std::string> failures;  // "metrics.slope: 2.5 vs 2 (rel 0.25)"
};

// Compares every numeric leaf of baseline["metrics"] with the report's,
// within rel_tol relatively or abs_floor absolutely. Missing fields fail.
BaselineDiff compare_baseline(const Json& report, const Json& baseline, double rel_tol = 1e-2,
                              double abs_floor = 1e-9);

}  // namespace kummer
