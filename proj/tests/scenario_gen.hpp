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

// Test-only generator of small random-but-valid scenarios, used by the
// property and conservation suites. Independent of the engine internals.

#pragma once

#include <string>
#include <vector>

#include "ecoscape/config.hpp"
#include "ecoscape/rng.hpp"

namespace ecoscape::testgen {

inline int pick(SplitMix64& rng, int lo, int hi) {  // inclusive
  return lo + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
}

inline double uniform(SplitMix64& rng, double lo, double hi) {
  return lo + rng.next_unit() * (hi - lo);
}

/// A small valid scenario: 1-3 zones, mixed node roles, full link mesh,
/// monotone model ladder, a handful of workers/producers, optional chaos,
/// and a random built-in remediator.
inline ScenarioConfig random_scenario(SplitMix64& rng) {
  ScenarioConfig c;
  c.seed = rng.next_u64() % 100000;
  c.sample_interval = Duration::seconds(1);
  c.phases.warmup = Duration::seconds(pick(rng, 3, 6));
  c.phases.evaluation = Duration::seconds(pick(rng, 8, 16));
  c.phases.teardown = Duration::seconds(pick(rng, 2, 4));

  int zone_count = pick(rng, 1, 3);
  for (int z = 0; z < zone_count; ++z) c.infrastructure.zones.push_back("z" + std::to_string(z));
  int node_count = pick(rng, 1, 4);
  bool has_cloud = false;
  for (int n = 0; n < node_count; ++n) {
    NodeSpec node;
    node.id = "n" + std::to_string(n);
    node.zone = c.infrastructure.zones[static_cast<std::size_t>(pick(rng, 0, zone_count - 1))];
    node.role = (pick(rng, 0, 1) == 0) ? NodeRole::edge : NodeRole::cloud;
    if (n == node_count - 1 && !has_cloud && pick(rng, 0, 1) == 0) node.role = NodeRole::cloud;
    has_cloud |= node.role == NodeRole::cloud;
    node.cpu_cores = pick(rng, 1, 4);
    node.idle_power_w = uniform(rng, 1, 30);
    node.max_power_w = node.idle_power_w + uniform(rng, 5, 100);
    c.infrastructure.nodes.push_back(std::move(node));
  }
  for (int a = 0; a < zone_count; ++a)
    for (int b = a + 1; b < zone_count; ++b) {
      LinkSpec link;
      link.zone_a = c.infrastructure.zones[static_cast<std::size_t>(a)];
      link.zone_b = c.infrastructure.zones[static_cast<std::size_t>(b)];
      link.latency = Duration::millis(uniform(rng, 1, 120));
      link.bandwidth_mbps = uniform(rng, 10, 200);
      c.infrastructure.links.push_back(std::move(link));
    }

  int model_count = pick(rng, 1, 3);
  double base_ms = uniform(rng, 20, 120);
  double accuracy = uniform(rng, 0.5, 0.9);
  for (int m = 0; m < model_count; ++m) {
    ModelProfile model;
    model.name = "m" + std::to_string(m);
    model.hidden_layers = 30 + 40 * m;
    model.base_service_time = Duration::millis(base_ms);
    model.accuracy = accuracy;
    model.energy_per_inference_j = uniform(rng, 0, 6);
    base_ms += uniform(rng, 5, 80);
    accuracy = std::min(1.0, accuracy + uniform(rng, 0.0, 0.05));
    c.system.model_profiles.push_back(std::move(model));
  }

  int worker_count = pick(rng, 0, 3);
  for (int w = 0; w < worker_count; ++w) {
    WorkerSpec worker;
    worker.id = "w" + std::to_string(w);
    worker.node = c.infrastructure.nodes[static_cast<std::size_t>(pick(rng, 0, node_count - 1))].id;
    worker.model =
        c.system.model_profiles[static_cast<std::size_t>(pick(rng, 0, model_count - 1))].name;
    worker.replicas = pick(rng, 1, 2);
    c.system.workers.push_back(std::move(worker));
  }
  c.system.worker_startup_delay = Duration::seconds(pick(rng, 1, 3));
  c.system.reconfig_delay = Duration::seconds(pick(rng, 1, 3));
  c.system.drain_policy = pick(rng, 0, 1) == 0 ? DrainPolicy::drop : DrainPolicy::finish_in_flight;

  int producer_count = pick(rng, 1, 2);
  for (int p = 0; p < producer_count; ++p) {
    ProducerSpec producer;
    producer.zone = c.infrastructure.zones[static_cast<std::size_t>(pick(rng, 0, zone_count - 1))];
    producer.rate_per_s = uniform(rng, 2, 20);
    producer.message_size_kb = uniform(rng, 10, 500);
    producer.process = pick(rng, 0, 1) == 0 ? ArrivalProcess::poisson : ArrivalProcess::uniform;
    c.data.producers.push_back(std::move(producer));
  }
  c.data.staleness_deadline = Duration::millis(uniform(rng, 300, 4000));

  // At most one chaos definition per target keeps windows overlap-free.
  if (pick(rng, 0, 2) > 0 && !c.infrastructure.nodes.empty()) {
    ChaosDef def;
    def.kind = ChaosKind::cpu_stress;
    def.node_targets.push_back(
        c.infrastructure.nodes[static_cast<std::size_t>(pick(rng, 0, node_count - 1))].id);
    def.threads = pick(rng, 1, 12);
    def.start_offset = Duration::seconds(pick(rng, 0, 5));
    if (pick(rng, 0, 1) == 0) def.duration = Duration::seconds(pick(rng, 0, 6));
    c.chaos.push_back(std::move(def));
  }
  if (pick(rng, 0, 2) == 0 && !c.infrastructure.links.empty()) {
    ChaosDef def;
    def.kind = ChaosKind::network_delay;
    const LinkSpec& link =
        c.infrastructure
            .links[static_cast<std::size_t>(pick(rng, 0, static_cast<int>(c.infrastructure.links.size()) - 1))];
    def.link_targets.emplace_back(link.zone_a, link.zone_b);
    def.new_latency = Duration::millis(uniform(rng, 0, 800));
    def.start_offset = Duration::seconds(pick(rng, 0, 5));
    if (pick(rng, 0, 1) == 0) def.duration = Duration::seconds(pick(rng, 0, 6));
    c.chaos.push_back(std::move(def));
  }

  int slo_count = pick(rng, 1, 3);
  std::vector<SliKind> kinds = {SliKind::event_time_latency, SliKind::error_rate,
                                SliKind::energy_per_task};
  for (int s = 0; s < slo_count; ++s) {
    SloSpec slo;
    slo.sli = kinds[static_cast<std::size_t>(s)];
    slo.name = to_string(slo.sli);
    slo.threshold = slo.sli == SliKind::event_time_latency ? uniform(rng, 0.2, 3.0)
                    : slo.sli == SliKind::error_rate       ? uniform(rng, 0.2, 0.8)
                                                           : uniform(rng, 20, 3000);
    slo.weight = 1.0 / slo_count;
    slo.window = Duration::seconds(pick(rng, 1, 5));
    c.slos.push_back(std::move(slo));
  }
  // Make the weights sum to exactly 1 regardless of the split.
  c.slos.back().weight = 1.0;
  for (std::size_t i = 0; i + 1 < c.slos.size(); ++i) c.slos.back().weight -= c.slos[i].weight;

  int strategy = pick(rng, 0, 2);
  if (strategy == 1 && !c.system.workers.empty()) {
    c.remediator.name = "scripted";
    ojson playbook = ojson::array();
    int entries = pick(rng, 1, 2);
    for (int e = 0; e < entries; ++e) {
      const WorkerSpec& worker =
          c.system.workers[static_cast<std::size_t>(pick(rng, 0, worker_count - 1))];
      ojson action;
      int kind = pick(rng, 0, 2);
      if (kind == 0) {
        action = {{"type", "reschedule"},
                  {"worker", worker.id},
                  {"node", c.infrastructure.nodes[static_cast<std::size_t>(
                                                      pick(rng, 0, node_count - 1))]
                               .id}};
      } else if (kind == 1) {
        action = {{"type", "set_model"},
                  {"worker", worker.id},
                  {"model", c.system.model_profiles[static_cast<std::size_t>(
                                                        pick(rng, 0, model_count - 1))]
                                .name}};
      } else {
        action = {{"type", "scale"}, {"worker", worker.id}, {"delta", pick(rng, -1, 2)}};
      }
      playbook.push_back({{"at_s", pick(rng, 0, 8)}, {"action", action}});
    }
    c.remediator.params = {{"playbook", playbook}};
  } else if (strategy == 2 && !c.system.workers.empty()) {
    c.remediator.name = "threshold";
    ojson action = {{"type", "scale"}, {"worker", c.system.workers.front().id}, {"delta", 1}};
    c.remediator.params = {
        {"rules", ojson::array({{{"slo", c.slos.front().name},
                                 {"consecutive", pick(rng, 1, 3)},
                                 {"action", action}}})}};
  }
  c.remediator.period = Duration::seconds(pick(rng, 1, 4));

  // Round-trip through the parser so every generated scenario is validated
  // exactly like a user-supplied file.
  return parse_scenario(serialize_scenario(c));
}

}  // namespace ecoscape::testgen
