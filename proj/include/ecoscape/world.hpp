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

#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "ecoscape/config.hpp"
#include "ecoscape/errors.hpp"
#include "ecoscape/time.hpp"

namespace ecoscape {

struct Message {
  std::uint64_t id = 0;
  SimTime produced_at;
  SimTime broker_arrive_at;
  std::uint32_t origin_zone = 0;
  std::uint32_t producer = 0;
  double size_kb = 0.0;
  double correctness_draw = 0.0;  // fixed at production so strategies cannot perturb it
};

struct WorldNode {
  std::string id;
  std::uint32_t zone = 0;
  NodeRole role = NodeRole::edge;
  double cpu_cores = 1.0;
  double idle_power_w = 0.0;
  double max_power_w = 0.0;

  int stress_threads = 0;
  int busy_instances = 0;      // instances mid fetch+inference
  int starting_instances = 0;  // instances loading up
  int running_instances = 0;   // starting + accepting + draining

  /// Core fraction a single worker gets under the fair-share contention
  /// model: min(1, C / (W + S)).
  double cpu_share() const {
    int demand = running_instances + stress_threads;
    if (demand <= 0) return 1.0;
    double share = cpu_cores / static_cast<double>(demand);
    return share > 1.0 ? 1.0 : share;
  }

  /// Busy core fraction, stress threads included. Drives the power model.
  double utilization() const {
    double busy = static_cast<double>(busy_instances + starting_instances + stress_threads);
    double u = busy / cpu_cores;
    return u > 1.0 ? 1.0 : u;
  }
};

struct WorldLink {
  std::uint32_t zone_a = 0;
  std::uint32_t zone_b = 0;
  Duration base_latency;
  Duration current_latency;
  double bandwidth_mbps = 0.0;
};

/// FIFO log of messages for one zone, ordered by production time. Dequeue
/// order equals queue order by construction.
struct WorldBroker {
  std::uint32_t zone = 0;
  std::deque<Message> queue;
  std::uint64_t enqueued = 0;
  std::uint64_t dequeued = 0;
};

enum class WorkerPhase { starting, accepting, draining, stopped };

inline std::string to_string(WorkerPhase p) {
  switch (p) {
    case WorkerPhase::starting: return "starting";
    case WorkerPhase::accepting: return "accepting";
    case WorkerPhase::draining: return "draining";
    case WorkerPhase::stopped: return "stopped";
  }
  return "?";
}

struct WorkerInstance {
  std::uint32_t idx = 0;  // registration order; also the dispatch priority
  std::string id;
  std::uint32_t logical = 0;
  std::uint32_t generation = 0;
  std::uint32_t node = 0;
  std::uint32_t model = 0;
  WorkerPhase phase = WorkerPhase::starting;

  bool busy = false;
  std::uint64_t busy_token = 0;  // invalidates stale service_complete events
  Message in_flight;
  SimTime in_flight_assigned_at;
  SimTime busy_until;
};

/// One worker entry from the scenario. Instances come and go across
/// reconfigurations; the logical worker carries the current target state.
struct LogicalWorker {
  std::string id;
  std::uint32_t node = 0;   // target placement
  std::uint32_t model = 0;  // target model
  int replicas = 1;
  std::uint32_t generation = 0;
  SimTime transition_until = Duration::micros(-1);
  std::vector<std::uint32_t> instances;  // live (non-stopped) instance indices
};

struct ResultRecord {
  std::uint64_t msg_id = 0;
  SimTime produced_at;
  SimTime broker_arrive_at;
  SimTime assigned_at;
  SimTime completed_at;
  std::uint32_t instance = 0;
  std::uint32_t node = 0;
  std::uint32_t model = 0;
  std::uint32_t origin_zone = 0;
  bool correct = false;
  bool stale = false;
};

/// Message conservation counters. produced == completed + dropped + queued +
/// in_service must hold at every instant.
struct Ledger {
  std::uint64_t produced = 0;
  std::uint64_t completed = 0;
  std::uint64_t dropped = 0;
  std::uint64_t in_flight_to_broker = 0;  // produced, not yet arrived at a broker
  std::uint64_t in_service = 0;           // pulled by a worker, not yet completed
  std::uint64_t conservation_checks = 0;
};

struct World {
  SimTime clock;
  std::vector<std::string> zones;
  std::vector<WorldNode> nodes;
  std::vector<WorldLink> links;
  std::vector<WorldBroker> brokers;
  std::vector<LogicalWorker> logical_workers;
  std::vector<WorkerInstance> instances;
  std::vector<ResultRecord> results;  // completion-time ordered
  Ledger ledger;

  std::map<std::string, std::uint32_t> zone_index;
  std::map<std::string, std::uint32_t> node_index;
  std::map<std::string, std::uint32_t> model_index;
  std::map<std::string, std::uint32_t> worker_index;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> link_index;
  std::vector<ModelProfile> models;

  const WorldLink* find_link(std::uint32_t za, std::uint32_t zb) const {
    auto key = za < zb ? std::make_pair(za, zb) : std::make_pair(zb, za);
    auto it = link_index.find(key);
    return it == link_index.end() ? nullptr : &links[it->second];
  }
  WorldLink* find_link(std::uint32_t za, std::uint32_t zb) {
    return const_cast<WorldLink*>(static_cast<const World*>(this)->find_link(za, zb));
  }

  std::uint64_t queued_messages() const {
    std::uint64_t n = ledger.in_flight_to_broker;
    for (const WorldBroker& b : brokers) n += b.queue.size();
    return n;
  }

  bool conservation_holds() const {
    return ledger.produced ==
           ledger.completed + ledger.dropped + queued_messages() + ledger.in_service;
  }
};

/// Callbacks the engine raises as the world evolves. The energy model hangs
/// off these; tests use them too.
class WorldObserver {
 public:
  virtual ~WorldObserver() = default;
  virtual void node_utilization(std::uint32_t node, SimTime t, double utilization) = 0;
  virtual void result_completed(const ResultRecord& result, double model_energy_j) = 0;
};

}  // namespace ecoscape
