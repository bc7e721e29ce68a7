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

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ecoscape/config.hpp"
#include "ecoscape/simcore.hpp"

namespace ecoscape {

// ---------------------------------------------------------------------------
// Actions
// ---------------------------------------------------------------------------

struct RescheduleAction {
  std::string worker;
  std::string node;
};
struct SetModelAction {
  std::string worker;
  std::string model;
};
struct ScaleAction {
  std::string worker;
  int delta = 0;
};
struct NoAction {};

using RemediationAction = std::variant<NoAction, RescheduleAction, SetModelAction, ScaleAction>;

inline std::string to_string(const RemediationAction& a) {
  if (std::holds_alternative<NoAction>(a)) return "noop";
  if (const auto* r = std::get_if<RescheduleAction>(&a))
    return "reschedule " + r->worker + " -> " + r->node;
  if (const auto* s = std::get_if<SetModelAction>(&a))
    return "set_model " + s->worker + " -> " + s->model;
  const auto& sc = std::get<ScaleAction>(a);
  return "scale " + sc.worker + (sc.delta >= 0 ? " +" : " ") + std::to_string(sc.delta);
}

inline RemediationAction parse_action(const ojson& j, const std::string& path) {
  detail::ObjReader r(j, path);
  std::string type = r.req_string("type");
  if (type == "noop") {
    r.finish();
    return NoAction{};
  }
  if (type == "reschedule") {
    RescheduleAction a{r.req_string("worker"), r.req_string("node")};
    r.finish();
    return a;
  }
  if (type == "set_model") {
    SetModelAction a{r.req_string("worker"), r.req_string("model")};
    r.finish();
    return a;
  }
  if (type == "scale") {
    ScaleAction a{r.req_string("worker"), static_cast<int>(r.req_integer("delta"))};
    r.finish();
    return a;
  }
  throw ConfigError(path + ".type", "expected one of noop, reschedule, set_model, scale");
}

// ---------------------------------------------------------------------------
// Observation: what a strategy is allowed to see
// ---------------------------------------------------------------------------

struct ObservedSlo {
  std::string name;
  SliKind sli = SliKind::event_time_latency;
  double threshold = 0.0;
  double value = 0.0;
  double ratio = 0.0;  // value / threshold
  bool compliant = true;
  bool has_sample = false;
  SimTime sample_t;
};

struct ObservedPlacement {
  std::string worker;
  std::string node;
  std::string model;
  int replicas = 0;
  std::string state;
  bool transitioning = false;
};

/// Read-only snapshot handed to strategies: the latest SLI samples and the
/// placement map, never a handle into the live world.
struct Observation {
  SimTime t;
  SimTime eval_start;
  std::vector<ObservedSlo> slos;
  std::vector<ObservedPlacement> placements;
};

// ---------------------------------------------------------------------------
// Strategy interface and the built-in strategies
// ---------------------------------------------------------------------------

class Remediator {
 public:
  virtual ~Remediator() = default;
  virtual std::string name() const = 0;
  virtual std::vector<RemediationAction> decide(const Observation& obs) = 0;
};

class NoopRemediator : public Remediator {
 public:
  std::string name() const override { return "noop"; }
  std::vector<RemediationAction> decide(const Observation&) override { return {}; }
};

/// Time-triggered playbook: each entry fires once, at the first tick at or
/// past its offset from evaluation start.
class ScriptedRemediator : public Remediator {
 public:
  struct Entry {
    Duration at;  // offset from evaluation start
    RemediationAction action;
    bool fired = false;
  };

  explicit ScriptedRemediator(std::vector<Entry> entries) : entries_(std::move(entries)) {}

  std::string name() const override { return "scripted"; }

  std::vector<RemediationAction> decide(const Observation& obs) override {
    std::vector<RemediationAction> out;
    Duration offset = obs.t - obs.eval_start;
    for (Entry& e : entries_) {
      if (e.fired || offset < e.at) continue;
      e.fired = true;
      out.push_back(e.action);
    }
    return out;
  }

 private:
  std::vector<Entry> entries_;
};

/// Fires a configured action once after K consecutive violating samples of a
/// named SLO. Consecutive means distinct samples; a stalled sampler does not
/// advance the count.
class ThresholdRemediator : public Remediator {
 public:
  struct Rule {
    std::string slo;
    int consecutive = 1;
    RemediationAction action;
    int seen = 0;
    bool fired = false;
    SimTime last_sample_t = Duration::micros(-1);
  };

  explicit ThresholdRemediator(std::vector<Rule> rules) : rules_(std::move(rules)) {}

  std::string name() const override { return "threshold"; }

  std::vector<RemediationAction> decide(const Observation& obs) override {
    std::vector<RemediationAction> out;
    for (Rule& rule : rules_) {
      if (rule.fired) continue;
      for (const ObservedSlo& slo : obs.slos) {
        if (slo.name != rule.slo || !slo.has_sample) continue;
        if (slo.sample_t == rule.last_sample_t) break;  // no new sample yet
        rule.last_sample_t = slo.sample_t;
        rule.seen = slo.compliant ? 0 : rule.seen + 1;
        if (rule.seen >= rule.consecutive) {
          rule.fired = true;
          out.push_back(rule.action);
        }
        break;
      }
    }
    return out;
  }

 private:
  std::vector<Rule> rules_;
};

inline std::vector<std::string> builtin_strategy_names() { return {"noop", "scripted", "threshold"}; }

/// Builds a strategy by registry name; playbooks and rules come from the
/// scenario's remediator params.
inline std::unique_ptr<Remediator> make_remediator(const std::string& name,
                                                   const RemediatorSpec& spec) {
  if (name == "noop") return std::make_unique<NoopRemediator>();
  if (name == "scripted") {
    std::vector<ScriptedRemediator::Entry> entries;
    if (spec.params.is_object() && spec.params.contains("playbook")) {
      const ojson& playbook = spec.params.at("playbook");
      if (!playbook.is_array()) throw ConfigError("remediator.params.playbook", "expected an array");
      for (std::size_t i = 0; i < playbook.size(); ++i) {
        std::string path = "remediator.params.playbook[" + std::to_string(i) + "]";
        detail::ObjReader r(playbook[i], path);
        ScriptedRemediator::Entry e;
        e.at = Duration::seconds(r.req_number("at_s"));
        e.action = parse_action(r.require("action"), path + ".action");
        r.finish();
        entries.push_back(std::move(e));
      }
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const auto& a, const auto& b) { return a.at < b.at; });
    return std::make_unique<ScriptedRemediator>(std::move(entries));
  }
  if (name == "threshold") {
    std::vector<ThresholdRemediator::Rule> rules;
    if (spec.params.is_object() && spec.params.contains("rules")) {
      const ojson& arr = spec.params.at("rules");
      if (!arr.is_array()) throw ConfigError("remediator.params.rules", "expected an array");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        std::string path = "remediator.params.rules[" + std::to_string(i) + "]";
        detail::ObjReader r(arr[i], path);
        ThresholdRemediator::Rule rule;
        rule.slo = r.req_string("slo");
        rule.consecutive = static_cast<int>(r.req_integer("consecutive"));
        if (rule.consecutive < 1) throw ConfigError(path + ".consecutive", "must be at least 1");
        rule.action = parse_action(r.require("action"), path + ".action");
        r.finish();
        rules.push_back(std::move(rule));
      }
    }
    return std::make_unique<ThresholdRemediator>(std::move(rules));
  }
  std::string available;
  for (const std::string& s : builtin_strategy_names())
    available += (available.empty() ? "" : ", ") + s;
  throw ConfigError("remediator.name",
                    "unknown strategy '" + name + "' (available: " + available + ")");
}

// ---------------------------------------------------------------------------
// Applying actions to the world
// ---------------------------------------------------------------------------

struct AppliedTransition {
  std::string worker;
  std::string action;
  SimTime started_at;
  SimTime accept_at;    // new instances start accepting
  SimTime completes_at;  // startup plus drain
};

struct ActionOutcome {
  bool applied = false;
  std::string action;
  std::string reason;  // rejection reason when not applied
  SimTime t;
  std::optional<AppliedTransition> transition;
};

/// Validates and applies one action. A bad action is rejected and reported;
/// it never aborts the run.
inline ActionOutcome apply_action(Engine& engine, const RemediationAction& action) {
  World& world = engine.mutable_world();
  ActionOutcome outcome;
  outcome.action = to_string(action);
  outcome.t = world.clock;

  auto reject = [&](const std::string& why) {
    outcome.applied = false;
    outcome.reason = why;
    return outcome;
  };

  if (std::holds_alternative<NoAction>(action)) {
    outcome.applied = true;
    return outcome;
  }

  std::string worker_id;
  if (const auto* r = std::get_if<RescheduleAction>(&action)) worker_id = r->worker;
  if (const auto* s = std::get_if<SetModelAction>(&action)) worker_id = s->worker;
  if (const auto* sc = std::get_if<ScaleAction>(&action)) worker_id = sc->worker;

  auto wit = world.worker_index.find(worker_id);
  if (wit == world.worker_index.end()) return reject("unknown worker '" + worker_id + "'");
  std::uint32_t li = wit->second;
  LogicalWorker& lw = world.logical_workers[li];
  if (world.clock < lw.transition_until)
    return reject("transition in flight for worker '" + worker_id + "'");

  TransitionHandle handle;
  if (const auto* r = std::get_if<RescheduleAction>(&action)) {
    auto nit = world.node_index.find(r->node);
    if (nit == world.node_index.end()) return reject("unknown node '" + r->node + "'");
    if (nit->second == lw.node) return reject("worker already placed on '" + r->node + "'");
    handle = engine.transition_replace(li, nit->second, lw.model);
  } else if (const auto* s = std::get_if<SetModelAction>(&action)) {
    auto mit = world.model_index.find(s->model);
    if (mit == world.model_index.end()) return reject("unknown model '" + s->model + "'");
    if (mit->second == lw.model) return reject("worker already runs model '" + s->model + "'");
    handle = engine.transition_replace(li, lw.node, mit->second);
  } else {
    const auto& sc = std::get<ScaleAction>(action);
    if (sc.delta == 0) return reject("scale by zero is a no-op misuse");
    if (lw.replicas + sc.delta < 1)
      return reject("scaling below one replica (have " + std::to_string(lw.replicas) + ")");
    handle = engine.transition_scale(li, sc.delta);
  }

  outcome.applied = true;
  outcome.transition =
      AppliedTransition{worker_id, outcome.action, handle.started_at, handle.accept_at,
                        handle.completes_at};
  return outcome;
}

}  // namespace ecoscape
