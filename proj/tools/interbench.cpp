// Command-line front end: run experiments from a JSON config, validate
// configs, render reports, and list the attack/defense/metric inventory.
//
// Exit codes: 0 success, 1 config/schema error (missing or invalid config,
// malformed report), 2 runtime error (I/O failures, experiment failures) or
// bad flags.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "interbench/pipeline.hpp"
#include "interbench/registry.hpp"

namespace {

using interbench::InteractionReport;
using nlohmann::json;

int log_level() {
  const char* v = std::getenv("INTERBENCH_LOG");
  if (!v) return 0;
  const std::string s(v);
  if (s == "debug") return 2;
  if (s == "info") return 1;
  return 0;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[interbench] " << msg << "\n";
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

std::string format_value(const json& v) {
  if (v.is_null()) return "-";
  std::ostringstream out;
  out << std::setprecision(6) << v.get<double>();
  return out.str();
}

int cmd_validate(const std::string& config_path) {
  json cfg;
  try {
    cfg = load_json_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  auto problems = interbench::validate_config(cfg);
  if (problems.empty()) return 0;
  for (const auto& p : problems) std::cerr << p << "\n";
  return 1;
}

int cmd_list() {
  std::vector<std::string> paths;
  for (const auto& e : interbench::registry()) paths.push_back(e.path());
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths) std::cout << p << "\n";
  return 0;
}

std::string value_token(const json& v) {
  std::string s = v.dump();
  for (char& c : s)
    if (c == '.') c = 'p';
  return s;
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            std::size_t jobs, long long seed_override) {
  json raw;
  try {
    raw = load_json_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  if (seed_override >= 0)
    raw["seeds"] = json::array({static_cast<std::uint64_t>(seed_override)});

  auto problems = interbench::validate_config(raw);
  if (!problems.empty()) {
    for (const auto& p : problems) std::cerr << p << "\n";
    return 1;
  }

  try {
    if (raw.contains("sweep")) {
      const std::string param = raw["sweep"]["param"].get<std::string>();
      const json values = raw["sweep"]["values"];
      json sweep_doc;
      sweep_doc["param"] = param;
      sweep_doc["points"] = json::array();
      for (const auto& v : values) {
        json point_cfg = raw;
        point_cfg.erase("sweep");
        point_cfg["defense"]["params"][param] = v;
        auto cfg = interbench::ExperimentConfig::parse(point_cfg);
        log_info("sweep " + param + "=" + v.dump());
        InteractionReport rep = interbench::run_experiment(cfg, jobs);
        const std::string path =
            out_dir + "/report_" + param + "_" + value_token(v) + ".json";
        interbench::write_report_json(rep, path);
        log_info("wrote " + path);
        json point;
        point["value"] = v;
        point["report"] = interbench::report_to_json(rep, true);
        sweep_doc["points"].push_back(std::move(point));
      }
      const std::string sweep_path = out_dir + "/sweep_" + param + ".json";
      interbench::write_text_atomic(sweep_path, sweep_doc.dump(2) + "\n");
      log_info("wrote " + sweep_path);
    } else {
      auto cfg = interbench::ExperimentConfig::parse(raw);
      InteractionReport rep = interbench::run_experiment(cfg, jobs);
      const std::string path = out_dir + "/report.json";
      interbench::write_report_json(rep, path);
      log_info("wrote " + path);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;  // runtime failure after a valid config
  }
  return 0;
}

int cmd_report(const std::string& in_path, const std::string& format) {
  json j;
  try {
    j = load_json_file(in_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  if (format == "plotdata") {
    if (!j.contains("points")) {
      std::cerr << "error: plotdata needs a sweep report (run with \"sweep\")\n";
      return 1;
    }
    std::cout << "metric,x,y,yerr\n";
    for (const auto& point : j["points"]) {
      const json& agg = point["report"]["aggregate"];
      for (const auto& [key, a] : agg.items()) {
        std::cout << key << ',' << point["value"].dump() << ','
                  << a["mean"].dump() << ',' << a["stderr"].dump() << "\n";
      }
    }
    return 0;
  }

  InteractionReport rep = interbench::report_from_json(j);
  if (format == "csv") {
    std::cout << interbench::report_csv(rep);
    return 0;
  }
  // table
  std::cout << "config " << rep.config_digest << "  created " << rep.created << "\n\n";
  std::cout << std::left << std::setw(32) << "metric" << std::setw(14) << "mean"
            << std::setw(14) << "stderr" << "n\n";
  for (const auto& [k, a] : rep.aggregate)
    std::cout << std::left << std::setw(32) << k << std::setw(14)
              << format_value(a.mean) << std::setw(14) << format_value(a.stderr_)
              << a.n << "\n";
  bool header = false;
  for (const auto& rec : rep.per_seed) {
    for (const auto& [k, v] : rec.metrics) {
      if (v) continue;
      if (!header) {
        std::cout << "\nnull metrics (per seed):\n";
        header = true;
      }
      std::cout << "  seed " << rec.seed << " " << rec.model << " " << k << " -\n";
    }
    for (const auto& [k, msg] : rec.errors)
      std::cout << "  seed " << rec.seed << " " << rec.model << " error[" << k
                << "]: " << msg << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"interaction benchmark for ML attacks and defenses"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", in_path, format = "table";
  std::size_t jobs = 1;
  long long seed_override = -1;

  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("--config", config_path, "experiment config JSON")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--jobs", jobs, "max parallel seeds");
  run->add_option("--seed-override", seed_override, "replace the seed list");

  auto* validate = app.add_subcommand("validate", "check a config, list violations");
  validate->add_option("--config", config_path, "experiment config JSON")->required();

  auto* report = app.add_subcommand("report", "render a report");
  report->add_option("--in", in_path, "report JSON")->required();
  report->add_option("--format", format, "table | csv | plotdata")
      ->check(CLI::IsMember({"table", "csv", "plotdata"}));

  app.add_subcommand("list", "list registered attacks, defenses, and metrics");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (app.got_subcommand("run")) return cmd_run(config_path, out_dir, jobs, seed_override);
  if (app.got_subcommand("validate")) return cmd_validate(config_path);
  if (app.got_subcommand("report")) return cmd_report(in_path, format);
  if (app.got_subcommand("list")) return cmd_list();
  return 2;
}
