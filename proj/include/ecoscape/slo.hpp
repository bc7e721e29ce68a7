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
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <sstream>
#include <string>
#include <vector>

#include "ecoscape/config.hpp"
#include "ecoscape/errors.hpp"
#include "ecoscape/world.hpp"

namespace ecoscape {

// ---------------------------------------------------------------------------
// Violation scoring
// ---------------------------------------------------------------------------

struct SliSample {
  SimTime t;
  double value = 0.0;
  bool carried = false;  // window had no completions; previous value held
  bool scored = false;   // inside the evaluation phase
};

struct SliSeries {
  std::string slo_name;
  SliKind sli = SliKind::event_time_latency;
  double threshold = 0.0;
  std::vector<SliSample> samples;
};

struct SloScore {
  std::string slo_name;
  double v_hat = 0.0;
  int sample_count = 0;
  int violating = 0;
  int clamped = 0;  // negative inputs clamped to zero
};

/// Per-sample shortfall: 1 - tau/v when the sample violates, else 0.
/// Negative inputs are physically impossible for these SLIs and clamp to 0.
inline double violation_term(double v, double tau) {
  if (v < 0.0) v = 0.0;
  return v > tau ? 1.0 - tau / v : 0.0;
}

/// Normalized violation score over a sample set: the mean shortfall, in
/// [0, 1), zero exactly when no sample exceeds the threshold.
inline SloScore violation_score(const std::vector<double>& values, double tau,
                                const std::string& slo_name = "") {
  if (tau <= 0.0) throw ConfigError("slos.threshold", "threshold must be positive for scoring");
  if (values.empty())
    throw ConfigError("series" + (slo_name.empty() ? "" : "." + slo_name),
                      "cannot score an empty sample series");
  SloScore score;
  score.slo_name = slo_name;
  score.sample_count = static_cast<int>(values.size());
  double sum = 0.0;
  for (double v : values) {
    if (v < 0.0) score.clamped += 1;
    double term = violation_term(v, tau);
    if (term > 0.0) score.violating += 1;
    sum += term;
  }
  score.v_hat = sum / static_cast<double>(values.size());
  return score;
}

/// Weighted aggregate across SLOs. Weights were validated to sum to 1.
inline double total_score(const std::vector<double>& v_hats, const std::vector<double>& weights) {
  if (v_hats.size() != weights.size())
    throw ConfigError("slos", "score/weight count mismatch (" + std::to_string(v_hats.size()) +
                                  " vs " + std::to_string(weights.size()) + ")");
  double total = 0.0;
  for (std::size_t i = 0; i < v_hats.size(); ++i) total += weights[i] * v_hats[i];
  return total;
}

// ---------------------------------------------------------------------------
// Energy model
// ---------------------------------------------------------------------------

/// Instantaneous node draw under the linear utilization model.
inline double node_power_w(double idle_w, double max_w, double utilization) {
  if (utilization < 0.0) utilization = 0.0;
  if (utilization > 1.0) utilization = 1.0;
  return idle_w + utilization * (max_w - idle_w);
}

/// Integrates piecewise-constant node power between world events, plus the
/// per-inference energy attributed at each completion. Supports exact
/// cluster-energy queries at any past instant.
class EnergyMeter : public WorldObserver {
 public:
  explicit EnergyMeter(const World& world) {
    nodes_.reserve(world.nodes.size());
    for (const WorldNode& n : world.nodes) {
      NodeMeter m;
      m.idle_w = n.idle_power_w;
      m.max_w = n.max_power_w;
      m.power_w = node_power_w(n.idle_power_w, n.max_power_w, n.utilization());
      cluster_power_w_ += m.power_w;
      nodes_.push_back(m);
    }
    breakpoints_.push_back(Breakpoint{SimTime(), 0.0, cluster_power_w_});
  }

  void node_utilization(std::uint32_t node, SimTime t, double utilization) override {
    integrate_to(t);
    NodeMeter& m = nodes_[node];
    integrate_node(node, t);
    double p = node_power_w(m.idle_w, m.max_w, utilization);
    cluster_power_w_ -= m.power_w;
    m.power_w = p;
    cluster_power_w_ += p;
    push_breakpoint(t);
  }

  void result_completed(const ResultRecord& r, double model_energy_j) override {
    integrate_to(r.completed_at);
    integrate_node(r.node, r.completed_at);
    cum_j_ += model_energy_j;
    nodes_[r.node].cum_j += model_energy_j;
    push_breakpoint(r.completed_at);
  }

  /// Total cluster energy consumed in [0, t].
  double cluster_energy_at(SimTime t) const {
    if (t < SimTime()) return 0.0;
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t,
                               [](SimTime v, const Breakpoint& b) { return v < b.t; });
    const Breakpoint& bp = *(it - 1);
    return bp.cum_j + bp.power_w * (t - bp.t).as_seconds();
  }

  double node_energy_at_end(std::uint32_t node, SimTime end) {
    integrate_node(node, end);
    return nodes_[node].cum_j;
  }

 private:
  struct NodeMeter {
    double idle_w = 0.0;
    double max_w = 0.0;
    double power_w = 0.0;
    double cum_j = 0.0;
    SimTime last_t;
  };
  struct Breakpoint {
    SimTime t;
    double cum_j;
    double power_w;
  };

  void integrate_to(SimTime t) {
    cum_j_ += cluster_power_w_ * (t - last_t_).as_seconds();
    last_t_ = t;
  }
  void integrate_node(std::uint32_t node, SimTime t) {
    NodeMeter& m = nodes_[node];
    m.cum_j += m.power_w * (t - m.last_t).as_seconds();
    m.last_t = t;
  }
  void push_breakpoint(SimTime t) {
    if (!breakpoints_.empty() && breakpoints_.back().t == t) {
      breakpoints_.back().cum_j = cum_j_;
      breakpoints_.back().power_w = cluster_power_w_;
    } else {
      breakpoints_.push_back(Breakpoint{t, cum_j_, cluster_power_w_});
    }
  }

  std::vector<NodeMeter> nodes_;
  std::vector<Breakpoint> breakpoints_;
  double cluster_power_w_ = 0.0;
  double cum_j_ = 0.0;
  SimTime last_t_;
};

// ---------------------------------------------------------------------------
// SLI sampling
// ---------------------------------------------------------------------------

struct EnergyWindow {
  SimTime t;          // tick end
  double joules = 0.0;
  int completed = 0;
};

/// Samples every configured SLI at each tick. Samples land in all phases;
/// only evaluation-phase samples carry the scored flag.
class SloSampler {
 public:
  SloSampler(const ScenarioConfig& cfg, const World* world, const EnergyMeter* meter)
      : cfg_(cfg), world_(world), meter_(meter) {
    for (const SloSpec& s : cfg.slos) {
      SliSeries series;
      series.slo_name = s.name;
      series.sli = s.sli;
      series.threshold = s.threshold;
      series_.push_back(std::move(series));
    }
  }

  void on_sample(SimTime t) {
    bool scored = t > cfg_.warmup_end() && t <= cfg_.eval_end();
    for (std::size_t i = 0; i < cfg_.slos.size(); ++i) {
      const SloSpec& slo = cfg_.slos[i];
      SimTime begin = ecoscape::max(SimTime(), t - slo.window);
      auto [lo, hi] = window_range(begin, t);
      std::size_t n = hi - lo;

      SliSample sample;
      sample.t = t;
      sample.scored = scored;
      if (n == 0) {
        sample.carried = true;
        sample.value = series_[i].samples.empty() ? 0.0 : series_[i].samples.back().value;
      } else {
        switch (slo.sli) {
          case SliKind::event_time_latency: {
            double sum = 0.0;
            for (std::size_t k = lo; k < hi; ++k)
              sum += (world_->results[k].completed_at - world_->results[k].produced_at).as_seconds();
            sample.value = sum / static_cast<double>(n);
            break;
          }
          case SliKind::error_rate: {
            std::size_t incorrect = 0;
            for (std::size_t k = lo; k < hi; ++k)
              if (!world_->results[k].correct) ++incorrect;
            sample.value = static_cast<double>(incorrect) / static_cast<double>(n);
            break;
          }
          case SliKind::energy_per_task: {
            double joules = meter_->cluster_energy_at(t) - meter_->cluster_energy_at(begin);
            sample.value = joules / static_cast<double>(n);
            break;
          }
        }
      }
      series_[i].samples.push_back(sample);
    }

    // Per-tick energy ledger entry; these tile the run exactly.
    auto [lo, hi] = window_range(last_tick_, t);
    EnergyWindow w;
    w.t = t;
    w.joules = meter_->cluster_energy_at(t) - meter_->cluster_energy_at(last_tick_);
    w.completed = static_cast<int>(hi - lo);
    energy_windows_.push_back(w);
    last_tick_ = t;
  }

  const std::vector<SliSeries>& series() const { return series_; }
  const std::vector<EnergyWindow>& energy_windows() const { return energy_windows_; }

  std::vector<double> scored_values(std::size_t slo_idx) const {
    std::vector<double> out;
    for (const SliSample& s : series_[slo_idx].samples)
      if (s.scored) out.push_back(s.value);
    return out;
  }

  const SliSample* latest(std::size_t slo_idx) const {
    return series_[slo_idx].samples.empty() ? nullptr : &series_[slo_idx].samples.back();
  }

 private:
  // Completed results with completed_at in (begin, end]; the result log is
  // completion-ordered so two binary searches suffice.
  std::pair<std::size_t, std::size_t> window_range(SimTime begin, SimTime end) const {
    const std::vector<ResultRecord>& rs = world_->results;
    auto lo = std::upper_bound(rs.begin(), rs.end(), begin,
                               [](SimTime v, const ResultRecord& r) { return v < r.completed_at; });
    auto hi = std::upper_bound(rs.begin(), rs.end(), end,
                               [](SimTime v, const ResultRecord& r) { return v < r.completed_at; });
    return {static_cast<std::size_t>(lo - rs.begin()), static_cast<std::size_t>(hi - rs.begin())};
  }

  const ScenarioConfig& cfg_;
  const World* world_;
  const EnergyMeter* meter_;
  std::vector<SliSeries> series_;
  std::vector<EnergyWindow> energy_windows_;
  SimTime last_tick_;
};

// ---------------------------------------------------------------------------
// SLI time-series CSV (export and import; `score` consumes this format)
// ---------------------------------------------------------------------------

inline std::string format_ms(SimTime t) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3f", t.as_millis());
  return buf;
}

inline std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string write_sli_csv(const std::vector<SliSeries>& series) {
  std::ostringstream out;
  out << "t_ms,sli,value,carried_forward\n";
  if (series.empty()) return out.str();
  std::size_t ticks = series.front().samples.size();
  for (std::size_t k = 0; k < ticks; ++k) {
    for (const SliSeries& s : series) {
      const SliSample& sample = s.samples[k];
      out << format_ms(sample.t) << "," << s.slo_name << "," << format_full(sample.value) << ","
          << (sample.carried ? 1 : 0) << "\n";
    }
  }
  return out.str();
}

struct SliCsvRow {
  double t_ms = 0.0;
  std::string name;
  double value = 0.0;
  bool carried = false;
};

inline std::vector<SliCsvRow> parse_sli_csv(const std::string& text) {
  std::vector<SliCsvRow> rows;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("sli_csv", "empty file");
  if (line.rfind("t_ms,sli,value,carried_forward", 0) != 0)
    throw ConfigError("sli_csv", "unexpected header: " + line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string t_str, name, value_str, carried_str;
    if (!std::getline(ls, t_str, ',') || !std::getline(ls, name, ',') ||
        !std::getline(ls, value_str, ',') || !std::getline(ls, carried_str))
      throw ConfigError("sli_csv:line " + std::to_string(lineno), "expected 4 comma-separated fields");
    SliCsvRow row;
    char* end = nullptr;
    row.t_ms = std::strtod(t_str.c_str(), &end);
    if (end == t_str.c_str()) throw ConfigError("sli_csv:line " + std::to_string(lineno), "bad t_ms");
    row.name = name;
    row.value = std::strtod(value_str.c_str(), &end);
    if (end == value_str.c_str())
      throw ConfigError("sli_csv:line " + std::to_string(lineno), "bad value");
    row.carried = carried_str == "1";
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace ecoscape
