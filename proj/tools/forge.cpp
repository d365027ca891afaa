// forge: runs the registered experiments and compares their reports.
//
//   forge list
//   forge run <experiment> [--config file] --out dir
//   forge sweep [experiments...] [--config file] --out dir
//   forge compare <report.json> <baseline.json> [--rtol 1e-2] [--atol 1e-9]
//
// Exit codes: 0 all checks pass, 1 a check or comparison failed, 2 error.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "kummer/errors.hpp"
#include "kummer/harness.hpp"
#include "kummer/parallel.hpp"

using namespace kummer;

namespace {

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// A config file is either one experiment's settings or an object keyed by
// experiment name.
ExperimentConfig config_for(const std::string& name, const Json& file) {
  const Experiment& e = find_experiment(name);
  if (file.is_null()) return e.defaults;
  const Json* j = &file;
  if (file.contains(name) && file[name].is_object()) j = &file[name];
  if (j->contains("experiment") && (*j)["experiment"] != name)
    throw ConfigError("config is for '" + (*j)["experiment"].get<std::string>() + "', not '" + name + "'");
  Json body = *j;
  for (const auto& other : experiment_registry())
    if (body.contains(other.first) && body[other.first].is_object()) body.erase(other.first);
  return ExperimentConfig::from_json(body, e.defaults);
}

int run_one(const std::string& name, const Json& file, const std::string& out) {
  try {
    ExperimentConfig cfg = config_for(name, file);
    ExperimentResult r = run_experiment(cfg);
    write_report(r, cfg, out);
    std::cout << (r.pass ? "PASS " : "FAIL ") << name;
    for (auto it = r.checks.begin(); it != r.checks.end(); ++it)
      if (!it->get<bool>()) std::cout << " [" << it.key() << "]";
    std::cout << '\n';
    return r.pass ? 0 : 1;
  } catch (const std::exception& e) {
    Json rec = write_error(name, e, out);
    std::cerr << rec.dump() << '\n';
    std::cout << "ERROR " << name << '\n';
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"forge: experiment runner"};
  app.require_subcommand(1);

  app.add_subcommand("list", "list registered experiments");

  auto* run = app.add_subcommand("run", "run one experiment");
  std::string name, config, out;
  run->add_option("experiment", name, "experiment name")->required();
  run->add_option("--config", config, "JSON config file");
  run->add_option("--out", out, "output directory")->required();

  auto* sweep = app.add_subcommand("sweep", "run several experiments (all by default)");
  std::vector<std::string> names;
  sweep->add_option("experiments", names, "experiment names");
  sweep->add_option("--config", config, "JSON config file keyed by experiment name");
  sweep->add_option("--out", out, "output directory")->required();

  auto* compare = app.add_subcommand("compare", "compare a report with a baseline");
  std::string report, baseline;
  double rtol = 1e-2, atol = 1e-9;
  compare->add_option("report", report, "report JSON")->required();
  compare->add_option("baseline", baseline, "baseline JSON")->required();
  compare->add_option("--rtol", rtol, "relative tolerance per field");
  compare->add_option("--atol", atol, "absolute floor per field");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("list")) {
      for (const auto& [key, e] : experiment_registry()) std::cout << key << "  " << e.description << '\n';
      return 0;
    }
    Json file;
    if (!config.empty()) file = read_json(config);
    if (app.got_subcommand(run)) return run_one(name, file, out);
    if (app.got_subcommand(sweep)) {
      if (names.empty())
        for (const auto& entry : experiment_registry()) names.push_back(entry.first);
      // experiments run one after another; each uses up to FORGE_THREADS workers
      int worst = 0;
      Json index = Json::object();
      for (const auto& n : names) {
        int code = run_one(n, file, out);
        index[n] = code == 0 ? "pass" : code == 1 ? "fail" : "error";
        worst = std::max(worst, code);
      }
      std::ofstream(out + "/sweep.json") << Json{{"threads", thread_count()}, {"results", index}}.dump(2) << '\n';
      return worst;
    }
    if (app.got_subcommand(compare)) {
      Json b = read_json(baseline);
      double tol = compare->count("--rtol") ? rtol : b.value("tolerance", rtol);
      BaselineDiff d = compare_baseline(read_json(report), b, tol, atol);
      for (const auto& f : d.failures) std::cout << "DIFF " << f << '\n';
      std::cout << (d.pass ? "MATCH" : "MISMATCH") << '\n';
      return d.pass ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << Json{{"error", {{"message", e.what()}}}}.dump() << '\n';
    return 2;
  }
  return 2;
}
