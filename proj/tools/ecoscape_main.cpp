// Copyright 2026 The Ecoscape Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ecoscape/ecoscape.hpp"

namespace fs = std::filesystem;
using namespace ecoscape;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Output files are never clobbered without an explicit --force.
void write_file(const fs::path& path, const std::string& content, bool force) {
  if (fs::exists(path) && !force)
    throw ConfigError(path.string(), "exists; pass --force to overwrite");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(path.string(), "cannot write file");
  out << content;
}

fs::path resolve_out_dir(const std::string& flag_value) {
  std::string dir = flag_value;
  if (dir.empty()) {
    if (const char* env = std::getenv("ECOSCAPE_OUT")) dir = env;
  }
  if (dir.empty())
    throw ConfigError("--out", "no output directory given (flag or ECOSCAPE_OUT)");
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

int run_command(const std::string& scenario_path, std::string strategy,
                std::optional<std::uint64_t> seed, const std::string& out_flag, bool force,
                const std::string& format, bool results_csv) {
  ScenarioConfig cfg = parse_scenario(read_file(scenario_path));
  if (seed) cfg.seed = *seed;
  if (strategy.empty()) strategy = cfg.remediator.name;

  std::unique_ptr<Remediator> remediator = make_remediator(strategy, cfg.remediator);
  RunReport report = run_scenario(cfg, *remediator, cfg.seed);

  fs::path out_dir = resolve_out_dir(out_flag);
  write_file(out_dir / "report.json", report_to_json(report).dump(2) + "\n", force);
  write_file(out_dir / "sli.csv", report.sli_csv, force);
  write_file(out_dir / "events.ndjson", report.events_ndjson, force);
  if (results_csv) write_file(out_dir / "results.csv", report.results_csv, force);

  if (format == "machine")
    std::cout << report_to_json(report).dump(2) << "\n";
  else
    std::cout << report_human_text(report);
  return 0;
}

int compare_command(const std::string& scenario_path, const std::string& strategies_flag,
                    int repetitions, std::optional<std::uint64_t> seed, int jobs,
                    const std::string& out_flag, bool force, const std::string& format) {
  ScenarioConfig cfg = parse_scenario(read_file(scenario_path));
  if (seed) cfg.seed = *seed;
  std::vector<std::string> strategies = split_csv_list(strategies_flag);
  ComparisonReport report = compare_strategies(cfg, strategies, repetitions, jobs);

  if (!out_flag.empty() || std::getenv("ECOSCAPE_OUT") != nullptr) {
    fs::path out_dir = resolve_out_dir(out_flag);
    write_file(out_dir / "comparison.csv", comparison_csv(report), force);
  }
  if (format == "machine")
    std::cout << comparison_to_json(report).dump(2) << "\n";
  else if (format == "csv")
    std::cout << comparison_csv(report);
  else
    std::cout << comparison_human_text(report);
  return 0;
}

int validate_command(const std::string& scenario_path) {
  ScenarioConfig cfg = parse_scenario(read_file(scenario_path));
  std::cout << "valid scenario: " << scenario_path << "\n";
  std::cout << "digest " << scenario_digest(cfg) << "\n";
  std::cout << "zones " << cfg.infrastructure.zones.size() << ", nodes "
            << cfg.infrastructure.nodes.size() << ", workers " << cfg.system.workers.size()
            << ", producers " << cfg.data.producers.size() << ", chaos " << cfg.chaos.size()
            << ", slos " << cfg.slos.size() << "\n";
  return 0;
}

int score_command(const std::string& sli_path, const std::string& slos_path,
                  std::optional<double> from_ms, std::optional<double> to_ms,
                  const std::string& format) {
  std::vector<SliCsvRow> rows = parse_sli_csv(read_file(sli_path));
  SloDocument doc = parse_slo_document(read_file(slos_path));
  if (!from_ms && !to_ms && doc.phases) {
    // A full scenario carries the evaluation window with it.
    from_ms = doc.phases->warmup.as_millis();
    to_ms = (doc.phases->warmup + doc.phases->evaluation).as_millis();
  }
  ExternalScore score = score_rows(rows, doc.slos, from_ms, to_ms);

  if (format == "machine") {
    ojson j = ojson::object();
    j["v_total"] = score.v_total;
    j["slos"] = ojson::array();
    for (std::size_t i = 0; i < doc.slos.size(); ++i)
      j["slos"].push_back({{"name", doc.slos[i].name},
                           {"threshold", doc.slos[i].threshold},
                           {"weight", doc.slos[i].weight},
                           {"v_hat", score.scores[i].v_hat},
                           {"samples", score.scores[i].sample_count},
                           {"violating", score.scores[i].violating}});
    std::cout << j.dump(2) << "\n";
  } else {
    for (std::size_t i = 0; i < doc.slos.size(); ++i) {
      const SloScore& s = score.scores[i];
      std::cout << doc.slos[i].name << ": V-hat " << format3(s.v_hat) << " (" << s.violating
                << "/" << s.sample_count << " violating)";
      if (s.clamped > 0) std::cout << "  [warning: " << s.clamped << " negative samples clamped to 0]";
      std::cout << "\n";
    }
    std::cout << "V_total = " << format3(score.v_total) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ecoscape: fault-tolerance benchmark harness for remediation strategies"};
  app.require_subcommand(1);

  std::string scenario_path, strategy, out_dir, strategies_flag;
  std::string format = "text";
  std::string sli_path, slos_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> from_ms, to_ms;
  int repetitions = 1;
  int jobs = 1;
  bool force = false;
  bool results_csv = false;

  CLI::App* run = app.add_subcommand("run", "execute one benchmark run and write its report");
  run->add_option("--scenario", scenario_path, "scenario JSON file")->required();
  run->add_option("--strategy", strategy, "remediation strategy (default: scenario's remediator)");
  run->add_option("--seed", seed, "seed override");
  run->add_option("--out", out_dir, "output directory (default: ECOSCAPE_OUT)");
  run->add_flag("--force", force, "overwrite existing output files");
  run->add_flag("--results-csv", results_csv, "also write the per-message result log");
  run->add_option("--format", format, "stdout format: text|machine")
      ->check(CLI::IsMember({"text", "machine"}));

  CLI::App* compare = app.add_subcommand("compare", "rank strategies over repeated runs");
  compare->add_option("--scenario", scenario_path, "scenario JSON file")->required();
  compare->add_option("--strategies", strategies_flag, "comma-separated strategy names")->required();
  compare->add_option("--repetitions", repetitions, "runs per strategy (seeds base+0..n-1)");
  compare->add_option("--seed", seed, "base seed override");
  compare->add_option("--jobs", jobs, "parallel runs");
  compare->add_option("--out", out_dir, "output directory for comparison.csv");
  compare->add_flag("--force", force, "overwrite existing output files");
  compare->add_option("--format", format, "stdout format: text|csv|machine")
      ->check(CLI::IsMember({"text", "csv", "machine"}));

  CLI::App* validate = app.add_subcommand("validate", "check a scenario and print its digest");
  validate->add_option("scenario", scenario_path, "scenario JSON file")->required();

  CLI::App* score = app.add_subcommand("score", "score an SLI CSV export against SLO definitions");
  score->add_option("--sli", sli_path, "SLI CSV (t_ms,sli,value,carried_forward)")->required();
  score->add_option("--slos", slos_path, "SLO definitions (scenario or {\"slos\": [...]})")
      ->required();
  score->add_option("--from-ms", from_ms, "score samples with t > from-ms");
  score->add_option("--to-ms", to_ms, "score samples with t <= to-ms");
  score->add_option("--format", format, "stdout format: text|machine")
      ->check(CLI::IsMember({"text", "machine"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return run_command(scenario_path, strategy, seed, out_dir, force, format, results_csv);
    if (compare->parsed())
      return compare_command(scenario_path, strategies_flag, repetitions, seed, jobs, out_dir,
                             force, format);
    if (validate->parsed()) return validate_command(scenario_path);
    if (score->parsed()) return score_command(sli_path, slos_path, from_ms, to_ms, format);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const InternalError& e) {
    std::cerr << "internal error (simulator bug): " << e.what() << "\n";
    return 2;
  } catch (const std::logic_error& e) {
    std::cerr << "internal error (simulator bug): " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
