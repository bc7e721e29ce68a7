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

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <future>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "ecoscape/config.hpp"
#include "ecoscape/remediation.hpp"
#include "ecoscape/simcore.hpp"
#include "ecoscape/slo.hpp"

namespace ecoscape {

struct SloReportEntry {
  SloSpec spec;
  SloScore score;
  double compliant_fraction = 0.0;  // SLA-style auxiliary statistic
};

struct ConservationSnapshot {
  std::uint64_t produced = 0;
  std::uint64_t completed = 0;
  std::uint64_t dropped = 0;
  std::uint64_t dropped_at_teardown = 0;
  std::uint64_t checks = 0;
  bool final_ok = false;
};

struct NodeEnergy {
  std::string node;
  double joules = 0.0;
};

/// Everything one run produced. Self-contained: the canonical scenario is
/// embedded so a report can be replicated from the report alone.
struct RunReport {
  std::string digest;
  std::uint64_t seed = 0;
  std::string strategy;
  double v_total = 0.0;
  std::vector<SloReportEntry> slos;
  std::vector<SliSeries> series;
  std::vector<EnergyWindow> energy_windows;
  std::vector<NodeEnergy> node_energy;
  double total_energy_j = 0.0;
  std::vector<AppliedTransition> transitions;
  std::vector<ActionOutcome> rejected_actions;
  std::map<std::string, std::uint64_t> event_counts;
  ConservationSnapshot conservation;
  ojson scenario;      // canonical form with the effective seed
  std::string sli_csv;
  std::string events_ndjson;
  std::string results_csv;
  double wall_ms = 0.0;  // human output only; never serialized
};

/// Executes one full benchmark run: warm-up, evaluation with chaos and
/// remediation, tear-down, then scoring.
inline RunReport run_scenario(const ScenarioConfig& scenario, Remediator& remediator,
                              std::uint64_t seed) {
  auto wall_start = std::chrono::steady_clock::now();
  ScenarioConfig cfg = scenario;
  cfg.seed = seed;

  Engine engine(cfg);
  EnergyMeter meter(engine.world());
  engine.set_observer(&meter);
  SloSampler sampler(engine.cfg(), &engine.world(), &meter);
  engine.set_sample_hook([&](SimTime t) { sampler.on_sample(t); });

  RunReport report;
  engine.set_remediator_hook([&](SimTime t) -> int {
    Observation obs;
    obs.t = t;
    obs.eval_start = cfg.warmup_end();
    for (std::size_t i = 0; i < cfg.slos.size(); ++i) {
      ObservedSlo view;
      view.name = cfg.slos[i].name;
      view.sli = cfg.slos[i].sli;
      view.threshold = cfg.slos[i].threshold;
      if (const SliSample* s = sampler.latest(i)) {
        view.has_sample = true;
        view.sample_t = s->t;
        view.value = s->value;
        view.ratio = s->value / cfg.slos[i].threshold;
        view.compliant = s->value <= cfg.slos[i].threshold;
      }
      obs.slos.push_back(std::move(view));
    }
    const World& world = engine.world();
    for (const LogicalWorker& lw : world.logical_workers) {
      ObservedPlacement p;
      p.worker = lw.id;
      p.node = world.nodes[lw.node].id;
      p.model = world.models[lw.model].name;
      p.replicas = lw.replicas;
      p.transitioning = t < lw.transition_until;
      bool accepting = false, starting = false, draining = false;
      for (std::uint32_t idx : lw.instances) {
        WorkerPhase ph = world.instances[idx].phase;
        accepting |= ph == WorkerPhase::accepting;
        starting |= ph == WorkerPhase::starting;
        draining |= ph == WorkerPhase::draining;
      }
      p.state = accepting ? "accepting" : starting ? "starting" : draining ? "draining" : "stopped";
      obs.placements.push_back(std::move(p));
    }

    std::vector<RemediationAction> actions;
    try {
      actions = remediator.decide(obs);
    } catch (const std::exception& e) {
      ActionOutcome failure;
      failure.t = t;
      failure.action = "(decide)";
      failure.reason = std::string("strategy threw: ") + e.what();
      report.rejected_actions.push_back(std::move(failure));
      return 1;
    }
    for (const RemediationAction& action : actions) {
      ActionOutcome outcome = apply_action(engine, action);
      if (outcome.applied && outcome.transition)
        report.transitions.push_back(*outcome.transition);
      else if (!outcome.applied)
        report.rejected_actions.push_back(outcome);
    }
    return static_cast<int>(actions.size());
  });

  engine.run_to_completion();

  // Scores over the evaluation-phase samples.
  std::vector<double> v_hats;
  std::vector<double> weights;
  for (std::size_t i = 0; i < cfg.slos.size(); ++i) {
    SloReportEntry entry;
    entry.spec = cfg.slos[i];
    std::vector<double> values = sampler.scored_values(i);
    entry.score = violation_score(values, cfg.slos[i].threshold, cfg.slos[i].name);
    entry.compliant_fraction =
        1.0 - static_cast<double>(entry.score.violating) / static_cast<double>(values.size());
    v_hats.push_back(entry.score.v_hat);
    weights.push_back(cfg.slos[i].weight);
    report.slos.push_back(std::move(entry));
  }
  report.v_total = total_score(v_hats, weights);

  report.digest = scenario_digest(cfg);
  report.seed = seed;
  report.strategy = remediator.name();
  report.series = sampler.series();
  report.energy_windows = sampler.energy_windows();
  const World& world = engine.world();
  for (std::uint32_t n = 0; n < world.nodes.size(); ++n) {
    double j = meter.node_energy_at_end(n, cfg.run_end());
    report.node_energy.push_back(NodeEnergy{world.nodes[n].id, j});
    report.total_energy_j += j;
  }
  for (const EventLogRecord& r : engine.event_log())
    report.event_counts[to_string(r.kind)] += 1;
  report.conservation.produced = world.ledger.produced;
  report.conservation.completed = world.ledger.completed;
  report.conservation.dropped = world.ledger.dropped;
  report.conservation.dropped_at_teardown = engine.dropped_at_teardown();
  report.conservation.checks = world.ledger.conservation_checks;
  report.conservation.final_ok = world.conservation_holds();
  report.scenario = to_canonical_json(cfg);
  report.sli_csv = write_sli_csv(report.series);
  report.events_ndjson = engine.event_log_ndjson();
  report.results_csv = engine.results_csv();
  report.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                             wall_start)
                       .count();
  return report;
}

inline RunReport run_scenario(const ScenarioConfig& scenario, const std::string& strategy_name) {
  std::unique_ptr<Remediator> remediator = make_remediator(strategy_name, scenario.remediator);
  return run_scenario(scenario, *remediator, scenario.seed);
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

/// Machine form of a report. Deterministic: identical runs produce
/// byte-identical documents (wall-clock time deliberately stays out).
inline ojson report_to_json(const RunReport& r) {
  ojson j = ojson::object();
  j["digest"] = r.digest;
  j["seed"] = r.seed;
  j["strategy"] = r.strategy;
  j["v_total"] = r.v_total;
  j["slos"] = ojson::array();
  for (const SloReportEntry& e : r.slos) {
    ojson s = {{"name", e.spec.name},
               {"sli", to_string(e.spec.sli)},
               {"threshold", e.spec.threshold},
               {"weight", e.spec.weight},
               {"window_s", e.spec.window.as_seconds()},
               {"v_hat", e.score.v_hat},
               {"samples", e.score.sample_count},
               {"violating", e.score.violating},
               {"clamped", e.score.clamped},
               {"compliant_fraction", e.compliant_fraction}};
    if (e.spec.display_as_accuracy) s["display_accuracy"] = true;
    j["slos"].push_back(std::move(s));
  }
  j["series"] = ojson::object();
  for (const SliSeries& s : r.series) {
    ojson arr = ojson::array();
    for (const SliSample& sample : s.samples) {
      arr.push_back({{"t_ms", sample.t.as_millis()},
                     {"value", sample.value},
                     {"ratio", sample.value / s.threshold},
                     {"carried", sample.carried},
                     {"scored", sample.scored}});
    }
    j["series"][s.slo_name] = std::move(arr);
  }
  j["transitions"] = ojson::array();
  for (const AppliedTransition& t : r.transitions)
    j["transitions"].push_back({{"worker", t.worker},
                                {"action", t.action},
                                {"started_ms", t.started_at.as_millis()},
                                {"accept_ms", t.accept_at.as_millis()},
                                {"completes_ms", t.completes_at.as_millis()}});
  j["rejected_actions"] = ojson::array();
  for (const ActionOutcome& a : r.rejected_actions)
    j["rejected_actions"].push_back(
        {{"t_ms", a.t.as_millis()}, {"action", a.action}, {"reason", a.reason}});
  j["events"] = ojson::object();
  for (const auto& [kind, count] : r.event_counts) j["events"][kind] = count;
  j["conservation"] = {{"produced", r.conservation.produced},
                       {"completed", r.conservation.completed},
                       {"dropped", r.conservation.dropped},
                       {"dropped_at_teardown", r.conservation.dropped_at_teardown},
                       {"checks", r.conservation.checks},
                       {"final_ok", r.conservation.final_ok}};
  ojson energy = ojson::object();
  energy["total_j"] = r.total_energy_j;
  energy["per_node"] = ojson::array();
  for (const NodeEnergy& n : r.node_energy)
    energy["per_node"].push_back({{"node", n.node}, {"joules", n.joules}});
  energy["windows"] = ojson::array();
  for (const EnergyWindow& w : r.energy_windows)
    energy["windows"].push_back(
        {{"t_ms", w.t.as_millis()}, {"joules", w.joules}, {"completed", w.completed}});
  j["energy"] = std::move(energy);
  j["scenario"] = r.scenario;
  return j;
}

inline std::string format3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

inline std::string report_human_text(const RunReport& r) {
  std::ostringstream out;
  out << "run      digest " << r.digest << "  seed " << r.seed << "  strategy " << r.strategy
      << "\n";
  out << "slos\n";
  for (const SloReportEntry& e : r.slos) {
    out << "  " << e.spec.name << " (" << to_string(e.spec.sli) << ", tau "
        << format3(e.spec.threshold) << ", weight " << format3(e.spec.weight)
        << "): V-hat " << format3(e.score.v_hat) << ", compliant "
        << format3(100.0 * e.compliant_fraction) << "%";
    if (e.spec.display_as_accuracy) {
      // The lower-bound objective reads more naturally as accuracy.
      for (const SliSeries& s : r.series) {
        if (s.slo_name != e.spec.name) continue;
        for (auto it = s.samples.rbegin(); it != s.samples.rend(); ++it) {
          if (it->scored) {
            out << " (accuracy " << format3(100.0 * (1.0 - it->value)) << "% at evaluation end)";
            break;
          }
        }
      }
    }
    out << "\n";
  }
  out << "V_total  " << format3(r.v_total) << "\n";
  out << "messages produced " << r.conservation.produced << ", completed "
      << r.conservation.completed << ", dropped " << r.conservation.dropped << " (of which "
      << r.conservation.dropped_at_teardown << " at tear-down)\n";
  out << "energy   " << format3(r.total_energy_j) << " J total\n";
  out << "wall     " << format3(r.wall_ms) << " ms\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Strategy comparison
// ---------------------------------------------------------------------------

struct ComparisonEntry {
  std::string strategy;
  std::vector<double> v_totals;  // by repetition index
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// Strategies ranked by mean V_total ascending (best first); ties broken by
/// name. Every strategy saw identical worlds per repetition index.
struct ComparisonReport {
  std::string digest;
  std::uint64_t base_seed = 0;
  int repetitions = 1;
  std::vector<ComparisonEntry> entries;
};

inline ComparisonReport compare_strategies(const ScenarioConfig& cfg,
                                           const std::vector<std::string>& strategies,
                                           int repetitions, int jobs = 1) {
  if (strategies.empty()) throw ConfigError("compare.strategies", "must name at least one strategy");
  if (repetitions < 1) throw ConfigError("compare.repetitions", "must be at least 1");
  for (const std::string& name : strategies) make_remediator(name, cfg.remediator);  // fail fast

  struct Task {
    std::size_t strategy_idx;
    int rep;
  };
  std::vector<Task> tasks;
  for (std::size_t s = 0; s < strategies.size(); ++s)
    for (int rep = 0; rep < repetitions; ++rep) tasks.push_back(Task{s, rep});

  std::vector<std::vector<double>> totals(strategies.size(),
                                          std::vector<double>(repetitions, 0.0));
  auto run_task = [&](const Task& task) {
    std::unique_ptr<Remediator> remediator =
        make_remediator(strategies[task.strategy_idx], cfg.remediator);
    RunReport report =
        run_scenario(cfg, *remediator, cfg.seed + static_cast<std::uint64_t>(task.rep));
    return report.v_total;
  };

  if (jobs <= 1) {
    for (const Task& task : tasks) totals[task.strategy_idx][task.rep] = run_task(task);
  } else {
    // Waves of independent runs; results merge by (strategy, repetition) so
    // parallel and serial execution produce identical reports.
    for (std::size_t base = 0; base < tasks.size(); base += static_cast<std::size_t>(jobs)) {
      std::size_t end = std::min(tasks.size(), base + static_cast<std::size_t>(jobs));
      std::vector<std::future<double>> wave;
      for (std::size_t i = base; i < end; ++i)
        wave.push_back(std::async(std::launch::async, run_task, tasks[i]));
      for (std::size_t i = base; i < end; ++i)
        totals[tasks[i].strategy_idx][tasks[i].rep] = wave[i - base].get();
    }
  }

  ComparisonReport report;
  report.digest = scenario_digest(cfg);
  report.base_seed = cfg.seed;
  report.repetitions = repetitions;
  for (std::size_t s = 0; s < strategies.size(); ++s) {
    ComparisonEntry e;
    e.strategy = strategies[s];
    e.v_totals = totals[s];
    e.min = *std::min_element(e.v_totals.begin(), e.v_totals.end());
    e.max = *std::max_element(e.v_totals.begin(), e.v_totals.end());
    double sum = 0.0;
    for (double v : e.v_totals) sum += v;
    e.mean = sum / static_cast<double>(e.v_totals.size());
    report.entries.push_back(std::move(e));
  }
  std::sort(report.entries.begin(), report.entries.end(),
            [](const ComparisonEntry& a, const ComparisonEntry& b) {
              if (a.mean != b.mean) return a.mean < b.mean;
              return a.strategy < b.strategy;
            });
  return report;
}

inline std::string comparison_csv(const ComparisonReport& r) {
  std::ostringstream out;
  out << "rank,strategy,repetitions,mean_v_total,min_v_total,max_v_total\n";
  for (std::size_t i = 0; i < r.entries.size(); ++i) {
    const ComparisonEntry& e = r.entries[i];
    out << (i + 1) << "," << e.strategy << "," << r.repetitions << "," << format_full(e.mean) << ","
        << format_full(e.min) << "," << format_full(e.max) << "\n";
  }
  return out.str();
}

inline ojson comparison_to_json(const ComparisonReport& r) {
  ojson j = ojson::object();
  j["digest"] = r.digest;
  j["base_seed"] = r.base_seed;
  j["repetitions"] = r.repetitions;
  j["ranking"] = ojson::array();
  for (const ComparisonEntry& e : r.entries) {
    j["ranking"].push_back({{"strategy", e.strategy},
                            {"mean_v_total", e.mean},
                            {"min_v_total", e.min},
                            {"max_v_total", e.max},
                            {"v_totals", e.v_totals}});
  }
  return j;
}

inline std::string comparison_human_text(const ComparisonReport& r) {
  std::ostringstream out;
  out << "comparison  digest " << r.digest << "  base seed " << r.base_seed << "  repetitions "
      << r.repetitions << "\n";
  out << "rank  strategy     mean    min     max\n";
  for (std::size_t i = 0; i < r.entries.size(); ++i) {
    const ComparisonEntry& e = r.entries[i];
    char line[160];
    std::snprintf(line, sizeof(line), "%-5zu %-12s %-7.3f %-7.3f %-7.3f\n", i + 1,
                  e.strategy.c_str(), e.mean, e.min, e.max);
    out << line;
  }
  return out.str();
}

}  // namespace ecoscape
