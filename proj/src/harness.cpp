#include "kummer/harness.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "kummer/errors.hpp"

namespace kummer {

Json ExperimentConfig::to_json() const {
  return Json{{"experiment", experiment}, {"eps", eps},         {"scales", scales}, {"delta", delta},
              {"grid_n", grid_n},         {"samples", samples}, {"seed", seed},     {"params", params}};
}

ExperimentConfig ExperimentConfig::from_json(const Json& j, const ExperimentConfig& base) {
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  ExperimentConfig c = base;
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& key = it.key();
      if (key == "experiment")
        c.experiment = it->get<std::string>();
      else if (key == "eps")
        c.eps = it->get<std::vector<double>>();
      else if (key == "scales")
        c.scales = it->get<std::vector<double>>();
      else if (key == "delta")
        c.delta = it->get<double>();
      else if (key == "grid_n")
        c.grid_n = it->get<int>();
      else if (key == "samples")
        c.samples = it->get<int>();
      else if (key == "seed")
        c.seed = it->get<unsigned>();
      else if (key == "params") {
        if (!it->is_object()) throw ConfigError("config field 'params' must be an object");
        c.params.update(*it);
      } else
        throw ConfigError("unknown config field '" + key + "'");
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed experiment config: ") + e.what());
  }
  if (c.samples < 1) throw ConfigError("samples must be positive");
  return c;
}

void Table::add(Json row) {
  if (!row.is_array() || row.size() != columns.size()) throw ConfigError("table row does not match the header");
  rows.push_back(std::move(row));
}

namespace {

std::string format_cell(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) {
    double x = v.get<double>();
    if (std::isnan(x)) return "nan";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
  }
  return "";
}

}  // namespace

void Table::write_csv(std::ostream& os) const {
  for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c];
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_cell(row[c]);
    os << '\n';
  }
}

void ExperimentResult::check(const std::string& name, bool ok) {
  checks[name] = ok;
  pass = pass && ok;
}

Json ExperimentResult::summary(const ExperimentConfig& config) const {
  return Json{{"experiment", experiment}, {"pass", pass},       {"checks", checks},
              {"metrics", metrics},       {"config", config.to_json()}, {"columns", table.columns},
              {"rows", table.rows.size()}};
}

const Experiment& find_experiment(const std::string& name) {
  const auto& reg = experiment_registry();
  auto it = reg.find(name);
  if (it == reg.end()) throw ConfigError("unknown experiment '" + name + "'");
  return it->second;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const Experiment& e = find_experiment(config.experiment);
  if (e.validate) e.validate(config);
  ExperimentResult r = e.run(config);
  r.experiment = e.name;
  return r;
}

Json write_report(const ExperimentResult& result, const ExperimentConfig& config, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base = std::filesystem::path(dir) / result.experiment;
  {
    std::ofstream csv(base.string() + ".csv");
    if (!csv) throw ConfigError("cannot write " + base.string() + ".csv");
    result.table.write_csv(csv);
  }
  Json s = result.summary(config);
  std::ofstream js(base.string() + ".json");
  if (!js) throw ConfigError("cannot write " + base.string() + ".json");
  js << s.dump(2) << '\n';
  return s;
}

Json write_error(const std::string& experiment, const std::exception& e, const std::string& dir) {
  std::string kind = "error";
  if (dynamic_cast<const ConfigError*>(&e)) kind = "config";
  else if (dynamic_cast<const DomainError*>(&e)) kind = "domain";
  else if (dynamic_cast<const ConvergenceError*>(&e)) kind = "convergence";
  else if (dynamic_cast<const DefinitenessError*>(&e)) kind = "definiteness";
  Json rec{{"experiment", experiment}, {"pass", false}, {"error", {{"kind", kind}, {"message", e.what()}}}};
  if (auto* ce = dynamic_cast<const ConvergenceError*>(&e)) rec["error"]["history"] = ce->history;
  if (!dir.empty()) {
    std::filesystem::create_directories(dir);
    std::ofstream os(std::filesystem::path(dir) / (experiment + ".error.json"));
    os << rec.dump(2) << '\n';
  }
  return rec;
}

SlopeReport fit_slope(const std::vector<double>& scale, const std::vector<double>& value, double max_residual) {
  if (scale.size() < 3 || scale.size() != value.size()) throw ConfigError("fit_slope needs at least 3 matching points");
  SlopeReport r;
  r.fit = fit_power_law(scale, value);
  r.flagged = !(r.fit.residual <= max_residual);
  return r;
}

namespace {

void compare_node(const Json& got, const Json& want, const std::string& path, double rel_tol, double abs_floor,
                  BaselineDiff& diff) {
  auto fail = [&](const std::string& why) {
    diff.pass = false;
    diff.failures.push_back(path + ": " + why);
  };
  if (want.is_object()) {
    if (!got.is_object()) return fail("expected an object");
    for (auto it = want.begin(); it != want.end(); ++it) {
      if (!got.contains(it.key())) {
        fail("missing field '" + it.key() + "'");
        continue;
      }
      compare_node(got[it.key()], *it, path + "." + it.key(), rel_tol, abs_floor, diff);
    }
  } else if (want.is_array()) {
    if (!got.is_array() || got.size() != want.size()) return fail("array shape differs");
    for (std::size_t i = 0; i < want.size(); ++i)
      compare_node(got[i], want[i], path + "[" + std::to_string(i) + "]", rel_tol, abs_floor, diff);
  } else if (want.is_number()) {
    if (!got.is_number()) return fail("expected a number");
    double a = got.get<double>(), b = want.get<double>();
    double err = std::abs(a - b);
    if (std::isnan(a) != std::isnan(b) || !(err <= rel_tol * std::abs(b) || err <= abs_floor))
      fail(format_cell(got) + " vs baseline " + format_cell(want) + " (rel " +
           format_cell(Json(b != 0 ? err / std::abs(b) : err)) + ")");
  } else if (got != want) {
    fail(got.dump() + " vs baseline " + want.dump());
  }
}

}  // namespace

BaselineDiff compare_baseline(const Json& report, const Json& baseline, double rel_tol, double abs_floor) {
  BaselineDiff diff;
  if (!baseline.contains("metrics")) throw ConfigError("baseline has no 'metrics' object");
  if (report.value("experiment", "") != baseline.value("experiment", ""))
    throw ConfigError("report and baseline belong to different experiments");
  if (!report.contains("metrics")) {
    diff.pass = false;
    diff.failures.push_back("metrics: missing in report");
    return diff;
  }
  compare_node(report["metrics"], baseline["metrics"], "metrics", rel_tol, abs_floor, diff);
  return diff;
}

}  // namespace kummer
