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
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ecoscape/errors.hpp"
#include "ecoscape/time.hpp"

namespace ecoscape {

using ojson = nlohmann::ordered_json;

enum class NodeRole { edge, cloud };
enum class DrainPolicy { drop, finish_in_flight };
enum class SliKind { event_time_latency, error_rate, energy_per_task };
enum class ChaosKind { network_delay, cpu_stress };
enum class ArrivalProcess { poisson, uniform };

/// One deployable model variant. Deeper variants must be at least as slow
/// and at least as accurate as shallower ones; remediation strategies rely
/// on that trade-off.
struct ModelProfile {
  std::string name;
  int hidden_layers = 0;
  Duration base_service_time;  // at a full dedicated core
  double accuracy = 0.0;       // probability of a correct classification
  double energy_per_inference_j = 0.0;
};

struct WorkerSpec {
  std::string id;
  std::string node;
  std::string model;
  int replicas = 1;
  std::optional<double> memory_limit_mb;                  // recorded, not simulated
  std::vector<std::pair<std::string, std::string>> env;  // recorded, not simulated
};

struct SystemDef {
  std::vector<ModelProfile> model_profiles;
  std::vector<WorkerSpec> workers;
  bool broker_per_zone = true;
  Duration worker_startup_delay = Duration::seconds(5);
  Duration reconfig_delay = Duration::seconds(10);  // extra delay for action-spawned workers
  DrainPolicy drain_policy = DrainPolicy::finish_in_flight;
};

struct NodeSpec {
  std::string id;
  std::string zone;
  NodeRole role = NodeRole::edge;
  double cpu_cores = 0.0;
  double idle_power_w = 0.0;
  double max_power_w = 0.0;
  std::optional<double> memory_mb;  // recorded, not simulated
};

struct LinkSpec {
  std::string zone_a;
  std::string zone_b;
  Duration latency;  // one-way
  double bandwidth_mbps = 0.0;
};

struct InfraDef {
  std::vector<std::string> zones;
  std::vector<NodeSpec> nodes;
  std::vector<LinkSpec> links;
  Duration intra_zone_transit = Duration::millis(1);
};

struct ProducerSpec {
  std::string zone;
  double rate_per_s = 0.0;
  double message_size_kb = 0.0;  // kilobits; transit cost is size/bandwidth
  ArrivalProcess process = ArrivalProcess::poisson;
};

struct DataDef {
  std::vector<ProducerSpec> producers;
  Duration staleness_deadline;  // results older than this count as incorrect
};

struct ChaosDef {
  ChaosKind kind = ChaosKind::cpu_stress;
  std::vector<std::string> node_targets;                             // cpu_stress
  std::vector<std::pair<std::string, std::string>> link_targets;     // network_delay
  Duration start_offset;                                             // from evaluation start
  std::optional<Duration> duration;                                  // nullopt = until tear-down
  Duration new_latency;                                              // network_delay
  int threads = 0;                                                   // cpu_stress
};

struct SloSpec {
  std::string name;
  SliKind sli = SliKind::event_time_latency;
  double threshold = 0.0;  // tau, in SLI units, always larger-is-worse
  double weight = 0.0;
  Duration window;  // aggregation window for samples
  bool display_as_accuracy = false;
};

struct PhasePlan {
  Duration warmup;
  Duration evaluation;
  Duration teardown;
};

struct RemediatorSpec {
  std::string name = "noop";
  Duration period = Duration::seconds(5);
  ojson params = ojson::object();
};

struct ScenarioConfig {
  std::uint64_t seed = 0;
  Duration sample_interval = Duration::seconds(1);
  PhasePlan phases;
  SystemDef system;
  InfraDef infrastructure;
  DataDef data;
  std::vector<ChaosDef> chaos;
  std::vector<SloSpec> slos;
  RemediatorSpec remediator;

  SimTime warmup_end() const { return phases.warmup; }
  SimTime eval_end() const { return phases.warmup + phases.evaluation; }
  SimTime run_end() const { return phases.warmup + phases.evaluation + phases.teardown; }
};

// ---------------------------------------------------------------------------
// Enum <-> string
// ---------------------------------------------------------------------------

inline std::string to_string(NodeRole r) { return r == NodeRole::edge ? "edge" : "cloud"; }
inline std::string to_string(DrainPolicy p) {
  return p == DrainPolicy::drop ? "drop" : "finish-in-flight";
}
inline std::string to_string(SliKind s) {
  switch (s) {
    case SliKind::event_time_latency: return "event_time_latency";
    case SliKind::error_rate: return "error_rate";
    case SliKind::energy_per_task: return "energy_per_task";
  }
  return "?";
}
inline std::string to_string(ChaosKind k) {
  return k == ChaosKind::network_delay ? "network_delay" : "cpu_stress";
}
inline std::string to_string(ArrivalProcess p) {
  return p == ArrivalProcess::poisson ? "poisson" : "uniform";
}

namespace detail {

// Thin reader over an ordered_json object that tracks consumed keys, so any
// leftover key is reported as an error instead of being silently ignored.
class ObjReader {
 public:
  ObjReader(const ojson& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  const std::string& path() const { return path_; }

  bool has(const char* key) const { return j_.contains(key); }

  const ojson& require(const char* key) {
    if (!j_.contains(key)) throw ConfigError(path_ + "." + key, "required field is missing");
    seen_.insert(key);
    return j_.at(key);
  }

  const ojson* optional(const char* key) {
    if (!j_.contains(key)) return nullptr;
    seen_.insert(key);
    return &j_.at(key);
  }

  double req_number(const char* key) { return as_number(require(key), path_ + "." + key); }
  double opt_number(const char* key, double def) {
    const ojson* v = optional(key);
    return v ? as_number(*v, path_ + "." + key) : def;
  }
  std::string req_string(const char* key) { return as_string(require(key), path_ + "." + key); }
  bool opt_bool(const char* key, bool def) {
    const ojson* v = optional(key);
    if (!v) return def;
    if (!v->is_boolean()) throw ConfigError(path_ + "." + key, "expected a boolean");
    return v->get<bool>();
  }
  std::int64_t req_integer(const char* key) {
    const ojson& v = require(key);
    if (!v.is_number_integer() && !v.is_number_unsigned())
      throw ConfigError(path_ + "." + key, "expected an integer");
    return v.get<std::int64_t>();
  }
  std::int64_t opt_integer(const char* key, std::int64_t def) {
    const ojson* v = optional(key);
    if (!v) return def;
    if (!v->is_number_integer() && !v->is_number_unsigned())
      throw ConfigError(path_ + "." + key, "expected an integer");
    return v->get<std::int64_t>();
  }

  // Rejects unknown keys. Call once all expected keys were consumed.
  void finish() {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key()))
        throw ConfigError(path_ + "." + item.key(), "unknown key (typos are hard errors)");
    }
  }

  static double as_number(const ojson& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    return v.get<double>();
  }
  static std::string as_string(const ojson& v, const std::string& path) {
    if (!v.is_string()) throw ConfigError(path, "expected a string");
    return v.get<std::string>();
  }

 private:
  const ojson& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline const ojson& as_array(const ojson& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array");
  return v;
}

inline Duration dur_s(double v) { return Duration::seconds(v); }
inline Duration dur_ms(double v) { return Duration::millis(v); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace detail {

inline SystemDef parse_system(const ojson& j, const std::string& path) {
  SystemDef sys;
  ObjReader r(j, path);

  const ojson& profiles = as_array(r.require("model_profiles"), path + ".model_profiles");
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    std::string p = path + ".model_profiles[" + std::to_string(i) + "]";
    ObjReader pr(profiles[i], p);
    ModelProfile m;
    m.name = pr.req_string("name");
    m.hidden_layers = static_cast<int>(pr.req_integer("hidden_layers"));
    m.base_service_time = dur_ms(pr.req_number("base_service_time_ms"));
    m.accuracy = pr.req_number("accuracy");
    m.energy_per_inference_j = pr.opt_number("energy_per_inference_j", 0.0);
    pr.finish();
    sys.model_profiles.push_back(std::move(m));
  }

  const ojson& workers = as_array(r.require("workers"), path + ".workers");
  for (std::size_t i = 0; i < workers.size(); ++i) {
    std::string p = path + ".workers[" + std::to_string(i) + "]";
    ObjReader wr(workers[i], p);
    WorkerSpec w;
    w.id = wr.req_string("id");
    w.node = wr.req_string("node");
    w.model = wr.req_string("model");
    w.replicas = static_cast<int>(wr.opt_integer("replicas", 1));
    if (const ojson* mem = wr.optional("memory_limit_mb"))
      w.memory_limit_mb = ObjReader::as_number(*mem, p + ".memory_limit_mb");
    if (const ojson* env = wr.optional("env")) {
      if (!env->is_object()) throw ConfigError(p + ".env", "expected an object");
      for (const auto& item : env->items()) {
        if (!item.value().is_string())
          throw ConfigError(p + ".env." + item.key(), "expected a string");
        w.env.emplace_back(item.key(), item.value().get<std::string>());
      }
    }
    wr.finish();
    sys.workers.push_back(std::move(w));
  }

  sys.worker_startup_delay = dur_s(r.opt_number("worker_startup_delay_s", 5.0));
  sys.reconfig_delay = dur_s(r.opt_number("reconfig_delay_s", 10.0));
  sys.broker_per_zone = r.opt_bool("broker_per_zone", true);
  if (const ojson* dp = r.optional("drain_policy")) {
    std::string s = ObjReader::as_string(*dp, path + ".drain_policy");
    if (s == "drop")
      sys.drain_policy = DrainPolicy::drop;
    else if (s == "finish-in-flight")
      sys.drain_policy = DrainPolicy::finish_in_flight;
    else
      throw ConfigError(path + ".drain_policy", "expected \"drop\" or \"finish-in-flight\"");
  }
  r.finish();
  return sys;
}

inline InfraDef parse_infrastructure(const ojson& j, const std::string& path) {
  InfraDef infra;
  ObjReader r(j, path);

  const ojson& zones = as_array(r.require("zones"), path + ".zones");
  for (std::size_t i = 0; i < zones.size(); ++i)
    infra.zones.push_back(
        ObjReader::as_string(zones[i], path + ".zones[" + std::to_string(i) + "]"));

  const ojson& nodes = as_array(r.require("nodes"), path + ".nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    std::string p = path + ".nodes[" + std::to_string(i) + "]";
    ObjReader nr(nodes[i], p);
    NodeSpec n;
    n.id = nr.req_string("id");
    n.zone = nr.req_string("zone");
    std::string role = nr.req_string("role");
    if (role == "edge")
      n.role = NodeRole::edge;
    else if (role == "cloud")
      n.role = NodeRole::cloud;
    else
      throw ConfigError(p + ".role", "expected \"edge\" or \"cloud\"");
    n.cpu_cores = nr.req_number("cpu_cores");
    n.idle_power_w = nr.req_number("idle_power_w");
    n.max_power_w = nr.req_number("max_power_w");
    if (const ojson* mem = nr.optional("memory_mb"))
      n.memory_mb = ObjReader::as_number(*mem, p + ".memory_mb");
    nr.finish();
    infra.nodes.push_back(std::move(n));
  }

  const ojson& links = as_array(r.require("links"), path + ".links");
  for (std::size_t i = 0; i < links.size(); ++i) {
    std::string p = path + ".links[" + std::to_string(i) + "]";
    ObjReader lr(links[i], p);
    LinkSpec l;
    l.zone_a = lr.req_string("a");
    l.zone_b = lr.req_string("b");
    l.latency = dur_ms(lr.req_number("latency_ms"));
    l.bandwidth_mbps = lr.req_number("bandwidth_mbps");
    lr.finish();
    infra.links.push_back(std::move(l));
  }

  infra.intra_zone_transit = dur_ms(r.opt_number("intra_zone_transit_ms", 1.0));
  r.finish();
  return infra;
}

inline DataDef parse_data(const ojson& j, const std::string& path) {
  DataDef data;
  ObjReader r(j, path);
  const ojson& producers = as_array(r.require("producers"), path + ".producers");
  for (std::size_t i = 0; i < producers.size(); ++i) {
    std::string p = path + ".producers[" + std::to_string(i) + "]";
    ObjReader pr(producers[i], p);
    ProducerSpec ps;
    ps.zone = pr.req_string("zone");
    ps.rate_per_s = pr.req_number("rate_per_s");
    ps.message_size_kb = pr.req_number("message_size_kb");
    if (const ojson* proc = pr.optional("process")) {
      std::string s = ObjReader::as_string(*proc, p + ".process");
      if (s == "poisson")
        ps.process = ArrivalProcess::poisson;
      else if (s == "uniform")
        ps.process = ArrivalProcess::uniform;
      else
        throw ConfigError(p + ".process", "expected \"poisson\" or \"uniform\"");
    }
    pr.finish();
    data.producers.push_back(std::move(ps));
  }
  data.staleness_deadline = dur_ms(r.req_number("staleness_deadline_ms"));
  r.finish();
  return data;
}

inline ChaosDef parse_chaos_def(const ojson& j, const std::string& path) {
  ObjReader r(j, path);
  ChaosDef def;
  std::string kind = r.req_string("kind");
  def.start_offset = dur_s(r.opt_number("start_offset_s", 0.0));
  if (const ojson* dur = r.optional("duration_s")) {
    if (dur->is_string()) {
      if (dur->get<std::string>() != "until_teardown")
        throw ConfigError(path + ".duration_s", "expected a number or \"until_teardown\"");
      def.duration = std::nullopt;
    } else {
      def.duration = dur_s(ObjReader::as_number(*dur, path + ".duration_s"));
    }
  } else {
    def.duration = std::nullopt;  // the default keeps the fault active to tear-down
  }

  const ojson& targets = as_array(r.require("targets"), path + ".targets");
  if (kind == "network_delay") {
    def.kind = ChaosKind::network_delay;
    def.new_latency = dur_ms(r.req_number("new_latency_ms"));
    for (std::size_t i = 0; i < targets.size(); ++i) {
      std::string p = path + ".targets[" + std::to_string(i) + "]";
      if (!targets[i].is_array() || targets[i].size() != 2)
        throw ConfigError(p, "expected a [zone_a, zone_b] pair");
      def.link_targets.emplace_back(ObjReader::as_string(targets[i][0], p + "[0]"),
                                    ObjReader::as_string(targets[i][1], p + "[1]"));
    }
  } else if (kind == "cpu_stress") {
    def.kind = ChaosKind::cpu_stress;
    def.threads = static_cast<int>(r.req_integer("threads"));
    for (std::size_t i = 0; i < targets.size(); ++i)
      def.node_targets.push_back(
          ObjReader::as_string(targets[i], path + ".targets[" + std::to_string(i) + "]"));
  } else {
    throw ConfigError(path + ".kind", "expected \"network_delay\" or \"cpu_stress\"");
  }
  r.finish();
  return def;
}

inline SloSpec parse_slo(const ojson& j, const std::string& path) {
  ObjReader r(j, path);
  SloSpec slo;
  slo.name = r.req_string("name");
  std::string sli = r.req_string("sli");
  slo.threshold = r.req_number("threshold");
  slo.weight = r.req_number("weight");
  slo.window = dur_s(r.req_number("window_s"));
  slo.display_as_accuracy = r.opt_bool("display_accuracy", false);
  if (sli == "event_time_latency") {
    slo.sli = SliKind::event_time_latency;
  } else if (sli == "error_rate") {
    slo.sli = SliKind::error_rate;
  } else if (sli == "energy_per_task") {
    slo.sli = SliKind::energy_per_task;
  } else if (sli == "accuracy") {
    // Lower-bound objective: store as its larger-is-worse complement so the
    // violation score applies unmodified.
    if (slo.threshold >= 1.0)
      throw ConfigError(path + ".threshold", "accuracy threshold must be below 1");
    slo.sli = SliKind::error_rate;
    slo.threshold = 1.0 - slo.threshold;
    slo.display_as_accuracy = true;
  } else {
    throw ConfigError(path + ".sli",
                      "expected one of event_time_latency, error_rate, energy_per_task, accuracy");
  }
  r.finish();
  return slo;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace detail {

struct NamePun {
  // unordered zone pair key
  static std::pair<std::string, std::string> pair_key(const std::string& a, const std::string& b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  }
};

inline void validate_scenario(const ScenarioConfig& c) {
  // Phases and sampling.
  if (c.phases.warmup <= kZeroDuration) throw ConfigError("phases.warmup_s", "must be positive");
  if (c.phases.evaluation <= kZeroDuration)
    throw ConfigError("phases.evaluation_s", "must be positive");
  if (c.phases.teardown <= kZeroDuration)
    throw ConfigError("phases.teardown_s", "must be positive");
  if (c.sample_interval <= kZeroDuration)
    throw ConfigError("sample_interval_ms", "must be positive");
  if (c.phases.evaluation < c.sample_interval)
    throw ConfigError("phases.evaluation_s",
                      "evaluation phase is shorter than one sample interval; nothing to score");

  // Zones.
  std::set<std::string> zones;
  if (c.infrastructure.zones.empty()) throw ConfigError("infrastructure.zones", "must be non-empty");
  for (std::size_t i = 0; i < c.infrastructure.zones.size(); ++i) {
    if (!zones.insert(c.infrastructure.zones[i]).second)
      throw ConfigError("infrastructure.zones[" + std::to_string(i) + "]",
                        "duplicate zone '" + c.infrastructure.zones[i] + "'");
  }

  // Nodes.
  std::set<std::string> node_ids;
  std::map<std::string, const NodeSpec*> node_by_id;
  for (std::size_t i = 0; i < c.infrastructure.nodes.size(); ++i) {
    const NodeSpec& n = c.infrastructure.nodes[i];
    std::string p = "infrastructure.nodes[" + std::to_string(i) + "]";
    if (!node_ids.insert(n.id).second) throw ConfigError(p + ".id", "duplicate node '" + n.id + "'");
    if (!zones.count(n.zone)) throw ConfigError(p + ".zone", "unknown zone '" + n.zone + "'");
    if (n.cpu_cores <= 0) throw ConfigError(p + ".cpu_cores", "must be positive");
    if (n.idle_power_w < 0) throw ConfigError(p + ".idle_power_w", "must be non-negative");
    if (n.max_power_w < n.idle_power_w)
      throw ConfigError(p + ".max_power_w", "must be at least idle_power_w");
    node_by_id[n.id] = &n;
  }

  // Links.
  std::set<std::pair<std::string, std::string>> link_pairs;
  for (std::size_t i = 0; i < c.infrastructure.links.size(); ++i) {
    const LinkSpec& l = c.infrastructure.links[i];
    std::string p = "infrastructure.links[" + std::to_string(i) + "]";
    if (!zones.count(l.zone_a)) throw ConfigError(p + ".a", "unknown zone '" + l.zone_a + "'");
    if (!zones.count(l.zone_b)) throw ConfigError(p + ".b", "unknown zone '" + l.zone_b + "'");
    if (l.zone_a == l.zone_b)
      throw ConfigError(p, "a link must connect two distinct zones; intra-zone transit is built in");
    if (!link_pairs.insert(NamePun::pair_key(l.zone_a, l.zone_b)).second)
      throw ConfigError(p, "duplicate link for zone pair '" + l.zone_a + "'/'" + l.zone_b + "'");
    if (l.latency < kZeroDuration) throw ConfigError(p + ".latency_ms", "must be non-negative");
    if (l.bandwidth_mbps <= 0) throw ConfigError(p + ".bandwidth_mbps", "must be positive");
  }

  // Model profiles, including the monotone depth/speed/accuracy trade-off.
  std::set<std::string> model_names;
  for (std::size_t i = 0; i < c.system.model_profiles.size(); ++i) {
    const ModelProfile& m = c.system.model_profiles[i];
    std::string p = "system.model_profiles[" + std::to_string(i) + "]";
    if (!model_names.insert(m.name).second)
      throw ConfigError(p + ".name", "duplicate model '" + m.name + "'");
    if (m.hidden_layers <= 0) throw ConfigError(p + ".hidden_layers", "must be positive");
    if (m.base_service_time <= kZeroDuration)
      throw ConfigError(p + ".base_service_time_ms", "must be positive");
    if (m.accuracy <= 0 || m.accuracy > 1)
      throw ConfigError(p + ".accuracy", "must be in (0, 1]");
    if (m.energy_per_inference_j < 0)
      throw ConfigError(p + ".energy_per_inference_j", "must be non-negative");
  }
  std::vector<const ModelProfile*> by_depth;
  for (const ModelProfile& m : c.system.model_profiles) by_depth.push_back(&m);
  std::sort(by_depth.begin(), by_depth.end(),
            [](const ModelProfile* a, const ModelProfile* b) {
              return a->hidden_layers < b->hidden_layers;
            });
  for (std::size_t i = 1; i < by_depth.size(); ++i) {
    const ModelProfile* lo = by_depth[i - 1];
    const ModelProfile* hi = by_depth[i];
    if (hi->base_service_time < lo->base_service_time || hi->accuracy < lo->accuracy)
      throw ConfigError("system.model_profiles",
                        "model '" + hi->name + "' is deeper than '" + lo->name +
                            "' but not monotonically slower and at least as accurate");
  }

  // Workers.
  std::set<std::string> worker_ids;
  for (std::size_t i = 0; i < c.system.workers.size(); ++i) {
    const WorkerSpec& w = c.system.workers[i];
    std::string p = "system.workers[" + std::to_string(i) + "]";
    if (!worker_ids.insert(w.id).second)
      throw ConfigError(p + ".id", "duplicate worker '" + w.id + "'");
    if (!node_by_id.count(w.node)) throw ConfigError(p + ".node", "unknown node '" + w.node + "'");
    if (!model_names.count(w.model))
      throw ConfigError(p + ".model", "unknown model '" + w.model + "'");
    if (w.replicas < 1) throw ConfigError(p + ".replicas", "must be at least 1");
  }

  // Producers.
  if (c.data.staleness_deadline <= kZeroDuration)
    throw ConfigError("data.staleness_deadline_ms", "must be positive");
  for (std::size_t i = 0; i < c.data.producers.size(); ++i) {
    const ProducerSpec& ps = c.data.producers[i];
    std::string p = "data.producers[" + std::to_string(i) + "]";
    if (!zones.count(ps.zone)) throw ConfigError(p + ".zone", "unknown zone '" + ps.zone + "'");
    if (ps.rate_per_s <= 0) throw ConfigError(p + ".rate_per_s", "must be positive");
    if (ps.message_size_kb <= 0) throw ConfigError(p + ".message_size_kb", "must be positive");
  }

  // Broker placement mirrors the runtime rule: one broker per producing zone,
  // or a single broker in the first producer's zone. Every route a message
  // can take needs a link; a missing pair is an error, not infinite capacity.
  std::vector<std::string> broker_zones;
  if (!c.data.producers.empty()) {
    if (c.system.broker_per_zone) {
      for (const ProducerSpec& ps : c.data.producers)
        if (std::find(broker_zones.begin(), broker_zones.end(), ps.zone) == broker_zones.end())
          broker_zones.push_back(ps.zone);
    } else {
      broker_zones.push_back(c.data.producers.front().zone);
    }
  }
  auto require_link = [&](const std::string& za, const std::string& zb, const std::string& why) {
    if (za == zb) return;
    if (!link_pairs.count(NamePun::pair_key(za, zb)))
      throw ConfigError("infrastructure.links",
                        "missing link between '" + za + "' and '" + zb + "' (" + why + ")");
  };
  for (const ProducerSpec& ps : c.data.producers) {
    const std::string& bz = c.system.broker_per_zone ? ps.zone : broker_zones.front();
    require_link(ps.zone, bz, "producer in '" + ps.zone + "' publishes to that broker");
  }
  for (const std::string& bz : broker_zones)
    for (const NodeSpec& n : c.infrastructure.nodes)
      if (n.role == NodeRole::cloud)
        require_link(bz, n.zone, "cloud node '" + n.id + "' consumes from the broker in '" + bz + "'");

  // Chaos definitions, including same-target window overlaps.
  struct Window {
    ChaosKind kind;
    std::string target;
    Duration start, end;
    std::size_t idx;
  };
  std::vector<Window> windows;
  for (std::size_t i = 0; i < c.chaos.size(); ++i) {
    const ChaosDef& d = c.chaos[i];
    std::string p = "chaos[" + std::to_string(i) + "]";
    if (d.start_offset < kZeroDuration) throw ConfigError(p + ".start_offset_s", "must be non-negative");
    if (d.duration && *d.duration < kZeroDuration)
      throw ConfigError(p + ".duration_s", "must be non-negative");
    Duration start = ecoscape::min(d.start_offset, c.phases.evaluation);
    Duration end = d.duration ? ecoscape::min(start + *d.duration, c.phases.evaluation)
                              : c.phases.evaluation;
    if (d.kind == ChaosKind::network_delay) {
      if (d.new_latency < kZeroDuration)
        throw ConfigError(p + ".new_latency_ms", "must be non-negative");
      if (d.link_targets.empty()) throw ConfigError(p + ".targets", "must name at least one link");
      for (std::size_t t = 0; t < d.link_targets.size(); ++t) {
        const auto& [za, zb] = d.link_targets[t];
        std::string tp = p + ".targets[" + std::to_string(t) + "]";
        if (!link_pairs.count(NamePun::pair_key(za, zb)))
          throw ConfigError(tp, "no link between '" + za + "' and '" + zb + "'");
        windows.push_back({d.kind, za + "|" + zb, start, end, i});
      }
    } else {
      if (d.threads < 1) throw ConfigError(p + ".threads", "must be at least 1");
      if (d.node_targets.empty()) throw ConfigError(p + ".targets", "must name at least one node");
      for (std::size_t t = 0; t < d.node_targets.size(); ++t) {
        const std::string& id = d.node_targets[t];
        if (!node_by_id.count(id))
          throw ConfigError(p + ".targets[" + std::to_string(t) + "]",
                            "unknown node '" + id + "'");
        windows.push_back({d.kind, id, start, end, i});
      }
    }
  }
  for (std::size_t i = 0; i < windows.size(); ++i) {
    for (std::size_t j = i + 1; j < windows.size(); ++j) {
      const Window& a = windows[i];
      const Window& b = windows[j];
      if (a.idx == b.idx || a.kind != b.kind) continue;
      std::string ta = a.target;
      std::string tb = b.target;
      if (a.kind == ChaosKind::network_delay) {
        auto norm = [](const std::string& s) {
          auto bar = s.find('|');
          auto k = NamePun::pair_key(s.substr(0, bar), s.substr(bar + 1));
          return k.first + "|" + k.second;
        };
        ta = norm(ta);
        tb = norm(tb);
      }
      if (ta != tb) continue;
      if (a.start < b.end && b.start < a.end)
        throw ConfigError("chaos[" + std::to_string(b.idx) + "]",
                          "overlaps chaos[" + std::to_string(a.idx) + "] on target '" + ta + "'");
    }
  }

  // SLOs.
  if (c.slos.empty()) throw ConfigError("slos", "must define at least one SLO");
  double weight_sum = 0.0;
  std::set<std::string> slo_names;
  for (std::size_t i = 0; i < c.slos.size(); ++i) {
    const SloSpec& s = c.slos[i];
    std::string p = "slos[" + std::to_string(i) + "]";
    if (!slo_names.insert(s.name).second)
      throw ConfigError(p + ".name", "duplicate SLO '" + s.name + "'");
    if (s.name.empty() || s.name.find(',') != std::string::npos ||
        s.name.find('\n') != std::string::npos)
      throw ConfigError(p + ".name", "must be non-empty and free of commas/newlines (CSV field)");
    if (s.threshold <= 0) throw ConfigError(p + ".threshold", "must be positive");
    if (s.weight < 0 || s.weight > 1) throw ConfigError(p + ".weight", "must be in [0, 1]");
    if (s.window <= kZeroDuration) throw ConfigError(p + ".window_s", "must be positive");
    weight_sum += s.weight;
  }
  if (std::abs(weight_sum - 1.0) > 1e-9)
    throw ConfigError("slos.weight", "weights must sum to 1 (got " + std::to_string(weight_sum) + ")");

  // Remediator block is structural here; the strategy name is resolved
  // against the registry when a run starts.
  if (c.remediator.period <= kZeroDuration)
    throw ConfigError("remediator.period_s", "must be positive");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

inline ScenarioConfig parse_scenario(const std::string& text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("$", std::string("not valid JSON: ") + e.what());
  }

  detail::ObjReader r(j, "$");
  ScenarioConfig c;
  std::int64_t seed = r.opt_integer("seed", 0);
  if (seed < 0) throw ConfigError("$.seed", "must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  c.sample_interval = detail::dur_ms(r.opt_number("sample_interval_ms", 1000.0));

  {
    detail::ObjReader pr(r.require("phases"), "phases");
    c.phases.warmup = detail::dur_s(pr.req_number("warmup_s"));
    c.phases.evaluation = detail::dur_s(pr.req_number("evaluation_s"));
    c.phases.teardown = detail::dur_s(pr.req_number("teardown_s"));
    pr.finish();
  }

  c.system = detail::parse_system(r.require("system"), "system");
  c.infrastructure = detail::parse_infrastructure(r.require("infrastructure"), "infrastructure");
  c.data = detail::parse_data(r.require("data"), "data");

  if (const ojson* chaos = r.optional("chaos")) {
    const ojson& arr = detail::as_array(*chaos, "chaos");
    for (std::size_t i = 0; i < arr.size(); ++i)
      c.chaos.push_back(detail::parse_chaos_def(arr[i], "chaos[" + std::to_string(i) + "]"));
  }

  const ojson& slos = detail::as_array(r.require("slos"), "slos");
  for (std::size_t i = 0; i < slos.size(); ++i)
    c.slos.push_back(detail::parse_slo(slos[i], "slos[" + std::to_string(i) + "]"));

  if (const ojson* rem = r.optional("remediator")) {
    detail::ObjReader rr(*rem, "remediator");
    c.remediator.name = rr.req_string("name");
    c.remediator.period = detail::dur_s(rr.opt_number("period_s", 5.0));
    if (const ojson* params = rr.optional("params")) c.remediator.params = *params;
    rr.finish();
  }

  r.finish();
  detail::validate_scenario(c);
  return c;
}

/// Canonical form: schema keys in fixed order, durations normalized,
/// lower-bound SLOs already inverted. parse(serialize(c)) == c.
inline ojson to_canonical_json(const ScenarioConfig& c) {
  ojson j = ojson::object();
  j["seed"] = c.seed;
  j["sample_interval_ms"] = c.sample_interval.as_millis();
  j["phases"] = {{"warmup_s", c.phases.warmup.as_seconds()},
                 {"evaluation_s", c.phases.evaluation.as_seconds()},
                 {"teardown_s", c.phases.teardown.as_seconds()}};

  ojson sys = ojson::object();
  sys["model_profiles"] = ojson::array();
  for (const ModelProfile& m : c.system.model_profiles) {
    ojson e = {{"name", m.name},
               {"hidden_layers", m.hidden_layers},
               {"base_service_time_ms", m.base_service_time.as_millis()},
               {"accuracy", m.accuracy},
               {"energy_per_inference_j", m.energy_per_inference_j}};
    sys["model_profiles"].push_back(std::move(e));
  }
  sys["workers"] = ojson::array();
  for (const WorkerSpec& w : c.system.workers) {
    ojson e = {{"id", w.id}, {"node", w.node}, {"model", w.model}, {"replicas", w.replicas}};
    if (w.memory_limit_mb) e["memory_limit_mb"] = *w.memory_limit_mb;
    if (!w.env.empty()) {
      ojson env = ojson::object();
      for (const auto& [k, v] : w.env) env[k] = v;
      e["env"] = std::move(env);
    }
    sys["workers"].push_back(std::move(e));
  }
  sys["worker_startup_delay_s"] = c.system.worker_startup_delay.as_seconds();
  sys["reconfig_delay_s"] = c.system.reconfig_delay.as_seconds();
  sys["broker_per_zone"] = c.system.broker_per_zone;
  sys["drain_policy"] = to_string(c.system.drain_policy);
  j["system"] = std::move(sys);

  ojson infra = ojson::object();
  infra["zones"] = c.infrastructure.zones;
  infra["nodes"] = ojson::array();
  for (const NodeSpec& n : c.infrastructure.nodes) {
    ojson e = {{"id", n.id},
               {"zone", n.zone},
               {"role", to_string(n.role)},
               {"cpu_cores", n.cpu_cores},
               {"idle_power_w", n.idle_power_w},
               {"max_power_w", n.max_power_w}};
    if (n.memory_mb) e["memory_mb"] = *n.memory_mb;
    infra["nodes"].push_back(std::move(e));
  }
  infra["links"] = ojson::array();
  for (const LinkSpec& l : c.infrastructure.links)
    infra["links"].push_back({{"a", l.zone_a},
                              {"b", l.zone_b},
                              {"latency_ms", l.latency.as_millis()},
                              {"bandwidth_mbps", l.bandwidth_mbps}});
  infra["intra_zone_transit_ms"] = c.infrastructure.intra_zone_transit.as_millis();
  j["infrastructure"] = std::move(infra);

  ojson data = ojson::object();
  data["producers"] = ojson::array();
  for (const ProducerSpec& p : c.data.producers)
    data["producers"].push_back({{"zone", p.zone},
                                 {"rate_per_s", p.rate_per_s},
                                 {"message_size_kb", p.message_size_kb},
                                 {"process", to_string(p.process)}});
  data["staleness_deadline_ms"] = c.data.staleness_deadline.as_millis();
  j["data"] = std::move(data);

  j["chaos"] = ojson::array();
  for (const ChaosDef& d : c.chaos) {
    ojson e = ojson::object();
    e["kind"] = to_string(d.kind);
    if (d.kind == ChaosKind::network_delay) {
      ojson targets = ojson::array();
      for (const auto& [a, b] : d.link_targets) targets.push_back(ojson::array({a, b}));
      e["targets"] = std::move(targets);
      e["new_latency_ms"] = d.new_latency.as_millis();
    } else {
      e["targets"] = d.node_targets;
      e["threads"] = d.threads;
    }
    e["start_offset_s"] = d.start_offset.as_seconds();
    if (d.duration)
      e["duration_s"] = d.duration->as_seconds();
    else
      e["duration_s"] = "until_teardown";
    j["chaos"].push_back(std::move(e));
  }

  j["slos"] = ojson::array();
  for (const SloSpec& s : c.slos) {
    ojson e = {{"name", s.name},
               {"sli", to_string(s.sli)},
               {"threshold", s.threshold},
               {"weight", s.weight},
               {"window_s", s.window.as_seconds()}};
    if (s.display_as_accuracy) e["display_accuracy"] = true;
    j["slos"].push_back(std::move(e));
  }

  j["remediator"] = {{"name", c.remediator.name},
                     {"period_s", c.remediator.period.as_seconds()},
                     {"params", c.remediator.params}};
  return j;
}

inline std::string serialize_scenario(const ScenarioConfig& c) {
  return to_canonical_json(c).dump(2) + "\n";
}

inline bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
  return to_canonical_json(a) == to_canonical_json(b);
}
inline bool operator!=(const ScenarioConfig& a, const ScenarioConfig& b) { return !(a == b); }

/// Stable content hash of the canonical form. Field order is significant:
/// two scenarios that differ only in SLO order get different digests.
inline std::string scenario_digest(const ScenarioConfig& c) {
  std::string s = to_canonical_json(c).dump();
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = hex[h & 0xF];
    h >>= 4;
  }
  return out;
}

}  // namespace ecoscape
