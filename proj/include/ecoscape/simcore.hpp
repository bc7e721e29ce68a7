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
#include <functional>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecoscape/chaos.hpp"
#include "ecoscape/config.hpp"
#include "ecoscape/errors.hpp"
#include "ecoscape/rng.hpp"
#include "ecoscape/world.hpp"

namespace ecoscape {

enum class EventKind : std::uint8_t {
  produce,
  transit_arrive,
  service_complete,
  sample_tick,
  chaos_start,
  chaos_end,
  remediator_tick,
  worker_state_change,
  phase_boundary,
};

inline std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::produce: return "produce";
    case EventKind::transit_arrive: return "transit_arrive";
    case EventKind::service_complete: return "service_complete";
    case EventKind::sample_tick: return "sample_tick";
    case EventKind::chaos_start: return "chaos_start";
    case EventKind::chaos_end: return "chaos_end";
    case EventKind::remediator_tick: return "remediator_tick";
    case EventKind::worker_state_change: return "worker_state_change";
    case EventKind::phase_boundary: return "phase_boundary";
  }
  return "?";
}

struct SimEvent {
  SimTime t;
  std::uint64_t seq = 0;  // ties execute in insertion order
  EventKind kind = EventKind::produce;
  std::uint64_t a = 0;
  std::uint64_t b = 0;
};

struct EventLogRecord {
  SimTime t;
  EventKind kind;
  std::uint64_t a = 0;
  std::uint64_t b = 0;
};

/// Inference duration under the fair-share contention model: the base time
/// stretched by how far demand exceeds the node's cores.
inline Duration contention_service_time(Duration base, const WorldNode& node) {
  int demand = node.running_instances + node.stress_threads;
  double stretch = demand > 0 ? static_cast<double>(demand) / node.cpu_cores : 1.0;
  if (stretch < 1.0) stretch = 1.0;
  return Duration::micros(
      static_cast<std::int64_t>(std::llround(static_cast<double>(base.count_us()) * stretch)));
}

/// One-way transit over a link: propagation latency plus serialization time
/// (size over bandwidth). Kilobits over megabits/second comes out in ms.
inline Duration transit_delay(const WorldLink& link, double size_kb) {
  return link.current_latency + Duration::millis(size_kb / link.bandwidth_mbps);
}

struct TransitionHandle {
  SimTime started_at;
  SimTime completes_at;
  SimTime accept_at;
  std::uint32_t gen_from = 0;
  std::uint32_t gen_to = 0;
  int drained = 0;
  int spawned = 0;
};

/// Deterministic discrete-event engine. One engine owns one run; distinct
/// runs are fully independent and may execute on different threads.
class Engine {
 public:
  explicit Engine(const ScenarioConfig& cfg) : cfg_(cfg), root_rng_(cfg.seed) { build(); }

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  const ScenarioConfig& cfg() const { return cfg_; }
  const World& world() const { return world_; }
  World& mutable_world() { return world_; }
  const std::vector<EventLogRecord>& event_log() const { return event_log_; }
  const std::vector<Message>& messages() const { return messages_; }
  bool finished() const { return finished_; }

  std::optional<SimTime> next_event_time() const {
    return queue_.empty() ? std::nullopt : std::optional<SimTime>(queue_.top().t);
  }

  void set_observer(WorldObserver* obs) { observer_ = obs; }
  void set_sample_hook(std::function<void(SimTime)> fn) { on_sample_ = std::move(fn); }
  void set_remediator_hook(std::function<int(SimTime)> fn) { on_remediator_ = std::move(fn); }

  /// Executes the next pending event. Returns false once the run is over.
  bool step() {
    if (finished_ || queue_.empty()) return false;
    SimEvent ev = queue_.top();
    queue_.pop();
    if (ev.t < world_.clock) throw InternalError("event queue went backwards in time");
    world_.clock = ev.t;
    dispatch(ev);
    return !finished_;
  }

  void run_to_completion() {
    while (step()) {
    }
    if (!finished_) throw InternalError("event queue drained before the run-end boundary");
  }

  // --- mutation API used by remediation ------------------------------------

  /// Replaces every live instance of a logical worker with a fresh
  /// generation on the given node/model. Old instances drain per the
  /// configured policy; new ones accept after reconfig + startup.
  TransitionHandle transition_replace(std::uint32_t logical_idx, std::uint32_t node_idx,
                                      std::uint32_t model_idx) {
    SimTime now = world_.clock;
    LogicalWorker& lw = world_.logical_workers.at(logical_idx);
    TransitionHandle h;
    h.started_at = now;
    h.gen_from = lw.generation;
    SimTime drain_end = now;
    std::vector<std::uint32_t> old_instances = lw.instances;
    for (std::uint32_t idx : old_instances) drain_end = ecoscape::max(drain_end, drain_instance(idx));
    h.drained = static_cast<int>(old_instances.size());

    lw.generation += 1;
    h.gen_to = lw.generation;
    lw.node = node_idx;
    lw.model = model_idx;
    h.accept_at = now + cfg_.system.reconfig_delay + cfg_.system.worker_startup_delay;
    for (int k = 0; k < lw.replicas; ++k) {
      spawn_instance(logical_idx, node_idx, model_idx, h.accept_at);
      ++h.spawned;
    }
    h.completes_at = h.accept_at + (drain_end - now);
    lw.transition_until = h.completes_at;
    return h;
  }

  /// Adds (delta > 0) or drains (delta < 0) replicas in place.
  TransitionHandle transition_scale(std::uint32_t logical_idx, int delta) {
    SimTime now = world_.clock;
    LogicalWorker& lw = world_.logical_workers.at(logical_idx);
    TransitionHandle h;
    h.started_at = now;
    h.gen_from = lw.generation;
    h.gen_to = lw.generation;
    if (delta > 0) {
      h.accept_at = now + cfg_.system.reconfig_delay + cfg_.system.worker_startup_delay;
      for (int k = 0; k < delta; ++k) {
        spawn_instance(logical_idx, lw.node, lw.model, h.accept_at);
        ++h.spawned;
      }
      h.completes_at = h.accept_at;
    } else {
      h.accept_at = now;
      SimTime drain_end = now;
      std::vector<std::uint32_t> live = lw.instances;
      std::sort(live.begin(), live.end());
      for (int k = 0; k < -delta && !live.empty(); ++k) {
        std::uint32_t victim = live.back();
        live.pop_back();
        drain_end = ecoscape::max(drain_end, drain_instance(victim));
        ++h.drained;
      }
      h.completes_at = drain_end;
    }
    lw.replicas += delta;
    lw.transition_until = h.completes_at;
    return h;
  }

  // --- exports --------------------------------------------------------------

  std::string event_log_ndjson() const {
    std::ostringstream out;
    for (const EventLogRecord& r : event_log_) out << render_event(r).dump() << "\n";
    return out.str();
  }

  std::string results_csv() const {
    std::ostringstream out;
    out << "msg_id,produced_ms,completed_ms,worker,node,correct\n";
    char buf[64];
    for (const ResultRecord& r : world_.results) {
      std::snprintf(buf, sizeof(buf), "%.3f", r.produced_at.as_millis());
      out << r.msg_id << "," << buf << ",";
      std::snprintf(buf, sizeof(buf), "%.3f", r.completed_at.as_millis());
      out << buf << "," << world_.instances[r.instance].id << "," << world_.nodes[r.node].id << ","
          << (r.correct ? 1 : 0) << "\n";
    }
    return out.str();
  }

  std::uint64_t dropped_at_teardown() const { return dropped_at_teardown_; }

 private:
  struct EventCmp {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
      if (a.t != b.t) return b.t < a.t;  // min-heap
      return b.seq < a.seq;
    }
  };

  struct ChaosWindow {
    std::size_t def_idx = 0;
    SimTime start;
    SimTime end;
  };

  // --- construction ---------------------------------------------------------

  void build() {
    // Zones, nodes, links, models.
    for (const std::string& z : cfg_.infrastructure.zones) {
      world_.zone_index[z] = static_cast<std::uint32_t>(world_.zones.size());
      world_.zones.push_back(z);
    }
    for (const NodeSpec& n : cfg_.infrastructure.nodes) {
      WorldNode wn;
      wn.id = n.id;
      wn.zone = world_.zone_index.at(n.zone);
      wn.role = n.role;
      wn.cpu_cores = n.cpu_cores;
      wn.idle_power_w = n.idle_power_w;
      wn.max_power_w = n.max_power_w;
      world_.node_index[n.id] = static_cast<std::uint32_t>(world_.nodes.size());
      world_.nodes.push_back(std::move(wn));
    }
    for (const LinkSpec& l : cfg_.infrastructure.links) {
      WorldLink wl;
      wl.zone_a = world_.zone_index.at(l.zone_a);
      wl.zone_b = world_.zone_index.at(l.zone_b);
      wl.base_latency = l.latency;
      wl.current_latency = l.latency;
      wl.bandwidth_mbps = l.bandwidth_mbps;
      auto key = wl.zone_a < wl.zone_b ? std::make_pair(wl.zone_a, wl.zone_b)
                                       : std::make_pair(wl.zone_b, wl.zone_a);
      world_.link_index[key] = static_cast<std::uint32_t>(world_.links.size());
      world_.links.push_back(wl);
    }
    for (const ModelProfile& m : cfg_.system.model_profiles) {
      world_.model_index[m.name] = static_cast<std::uint32_t>(world_.models.size());
      world_.models.push_back(m);
    }

    // Broker placement: one per producing zone, or a single broker in the
    // first producer's zone when broker_per_zone is off.
    for (std::size_t i = 0; i < cfg_.data.producers.size(); ++i) {
      std::uint32_t zone = world_.zone_index.at(cfg_.data.producers[i].zone);
      std::uint32_t broker_zone = zone;
      if (!cfg_.system.broker_per_zone)
        broker_zone = world_.zone_index.at(cfg_.data.producers.front().zone);
      std::uint32_t broker_idx = 0;
      bool found = false;
      for (std::uint32_t b = 0; b < world_.brokers.size(); ++b) {
        if (world_.brokers[b].zone == broker_zone) {
          broker_idx = b;
          found = true;
          break;
        }
      }
      if (!found) {
        WorldBroker broker;
        broker.zone = broker_zone;
        broker_idx = static_cast<std::uint32_t>(world_.brokers.size());
        world_.brokers.push_back(std::move(broker));
      }
      broker_for_producer_.push_back(broker_idx);
    }

    // Logical workers and their first generation of instances.
    for (const WorkerSpec& w : cfg_.system.workers) {
      LogicalWorker lw;
      lw.id = w.id;
      lw.node = world_.node_index.at(w.node);
      lw.model = world_.model_index.at(w.model);
      lw.replicas = w.replicas;
      world_.worker_index[w.id] = static_cast<std::uint32_t>(world_.logical_workers.size());
      world_.logical_workers.push_back(std::move(lw));
    }

    // Deterministic same-time ordering comes from insertion sequence:
    // samples, then phase boundaries, then remediator ticks, then chaos,
    // then producers, then worker startups.
    for (SimTime t = cfg_.sample_interval; t <= cfg_.run_end(); t += cfg_.sample_interval)
      schedule(t, EventKind::sample_tick, 0, 0);
    schedule(cfg_.warmup_end(), EventKind::phase_boundary, 0, 0);
    schedule(cfg_.eval_end(), EventKind::phase_boundary, 1, 0);
    schedule(cfg_.run_end(), EventKind::phase_boundary, 2, 0);
    for (SimTime t = cfg_.warmup_end(); t <= cfg_.eval_end(); t += cfg_.remediator.period)
      schedule(t, EventKind::remediator_tick, 0, 0);
    for (std::size_t i = 0; i < cfg_.chaos.size(); ++i) {
      const ChaosDef& d = cfg_.chaos[i];
      ChaosWindow w;
      w.def_idx = i;
      Duration offset = ecoscape::min(d.start_offset, cfg_.phases.evaluation);
      w.start = cfg_.warmup_end() + offset;
      w.end = d.duration ? ecoscape::min(w.start + *d.duration, cfg_.eval_end()) : cfg_.eval_end();
      std::uint64_t idx = chaos_windows_.size();
      chaos_windows_.push_back(w);
      active_faults_.emplace_back();
      schedule(w.start, EventKind::chaos_start, idx, 0);
      schedule(w.end, EventKind::chaos_end, idx, 0);
    }
    for (std::size_t i = 0; i < cfg_.data.producers.size(); ++i) {
      producer_rng_.push_back(root_rng_.fork(i));
      SimTime first = SimTime() + next_gap(i);
      if (first <= cfg_.eval_end()) schedule(first, EventKind::produce, i, 0);
    }
    for (std::uint32_t li = 0; li < world_.logical_workers.size(); ++li) {
      LogicalWorker& lw = world_.logical_workers[li];
      for (int k = 0; k < lw.replicas; ++k)
        spawn_instance(li, lw.node, lw.model, cfg_.system.worker_startup_delay);
    }
  }

  Duration next_gap(std::size_t producer) {
    const ProducerSpec& p = cfg_.data.producers[producer];
    if (p.process == ArrivalProcess::uniform) return Duration::seconds(1.0 / p.rate_per_s);
    return Duration::seconds(producer_rng_[producer].next_exponential_s(p.rate_per_s));
  }

  // --- event plumbing -------------------------------------------------------

  void schedule(SimTime t, EventKind kind, std::uint64_t a, std::uint64_t b) {
    queue_.push(SimEvent{t, next_seq_++, kind, a, b});
  }

  void log_event(EventKind kind, std::uint64_t a, std::uint64_t b) {
    event_log_.push_back(EventLogRecord{world_.clock, kind, a, b});
  }

  void dispatch(const SimEvent& ev) {
    switch (ev.kind) {
      case EventKind::produce: return handle_produce(ev);
      case EventKind::transit_arrive: return handle_transit_arrive(ev);
      case EventKind::service_complete: return handle_service_complete(ev);
      case EventKind::sample_tick: return handle_sample_tick(ev);
      case EventKind::chaos_start: return handle_chaos_start(ev);
      case EventKind::chaos_end: return handle_chaos_end(ev);
      case EventKind::remediator_tick: return handle_remediator_tick(ev);
      case EventKind::worker_state_change: return handle_state_change(ev);
      case EventKind::phase_boundary: return handle_phase_boundary(ev);
    }
    throw InternalError("unknown event kind");
  }

  void handle_produce(const SimEvent& ev) {
    std::size_t producer = ev.a;
    const ProducerSpec& spec = cfg_.data.producers[producer];
    Message msg;
    msg.id = messages_.size();
    msg.produced_at = world_.clock;
    msg.origin_zone = world_.zone_index.at(spec.zone);
    msg.producer = static_cast<std::uint32_t>(producer);
    msg.size_kb = spec.message_size_kb;
    msg.correctness_draw = producer_rng_[producer].next_unit();
    messages_.push_back(msg);
    world_.ledger.produced += 1;
    world_.ledger.in_flight_to_broker += 1;
    log_event(EventKind::produce, msg.id, producer);

    const WorldBroker& broker = world_.brokers[broker_for_producer_[producer]];
    Duration transit = zone_transit(msg.origin_zone, broker.zone, msg.size_kb);
    schedule(world_.clock + transit, EventKind::transit_arrive, msg.id, 0);

    SimTime next = world_.clock + next_gap(producer);
    if (next <= cfg_.eval_end()) schedule(next, EventKind::produce, producer, 0);
  }

  void handle_transit_arrive(const SimEvent& ev) {
    Message msg = messages_[ev.a];
    msg.broker_arrive_at = world_.clock;
    messages_[ev.a] = msg;
    world_.ledger.in_flight_to_broker -= 1;
    WorldBroker& broker = world_.brokers[broker_for_producer_[msg.producer]];
    // The broker log is ordered by production time; same-zone transit is
    // constant so this is almost always a plain append.
    auto pos = broker.queue.end();
    while (pos != broker.queue.begin()) {
      auto prev = pos - 1;
      if (prev->produced_at < msg.produced_at ||
          (prev->produced_at == msg.produced_at && prev->id < msg.id))
        break;
      pos = prev;
    }
    broker.queue.insert(pos, msg);
    broker.enqueued += 1;
    log_event(EventKind::transit_arrive, msg.id, broker.zone);
    dispatch_work();
  }

  void handle_service_complete(const SimEvent& ev) {
    WorkerInstance& inst = world_.instances[ev.a];
    if (!inst.busy || inst.busy_token != ev.b) return;  // cancelled by a drop-drain

    const Message& msg = inst.in_flight;
    const ModelProfile& model = world_.models[inst.model];
    Duration latency = world_.clock - msg.produced_at;
    ResultRecord r;
    r.msg_id = msg.id;
    r.produced_at = msg.produced_at;
    r.broker_arrive_at = msg.broker_arrive_at;
    r.assigned_at = inst.in_flight_assigned_at;
    r.completed_at = world_.clock;
    r.instance = inst.idx;
    r.node = inst.node;
    r.model = inst.model;
    r.origin_zone = msg.origin_zone;
    r.stale = latency > cfg_.data.staleness_deadline;
    r.correct = (msg.correctness_draw < model.accuracy) && !r.stale;
    world_.results.push_back(r);
    world_.ledger.completed += 1;
    world_.ledger.in_service -= 1;

    inst.busy = false;
    WorldNode& node = world_.nodes[inst.node];
    node.busy_instances -= 1;
    notify_node(inst.node);
    if (observer_) observer_->result_completed(r, model.energy_per_inference_j);
    log_event(EventKind::service_complete, msg.id, inst.idx);

    if (inst.phase == WorkerPhase::draining) {
      stop_instance(inst.idx);
    } else {
      dispatch_work();
    }
  }

  void handle_sample_tick(const SimEvent&) {
    if (!world_.conservation_holds())
      throw InternalError("message conservation violated at sample tick");
    world_.ledger.conservation_checks += 1;
    log_event(EventKind::sample_tick, 0, 0);
    if (on_sample_) on_sample_(world_.clock);
  }

  void handle_chaos_start(const SimEvent& ev) {
    const ChaosWindow& w = chaos_windows_[ev.a];
    active_faults_[ev.a] = chaos_apply(world_, cfg_.chaos[w.def_idx], active_faults_, world_.clock);
    for (std::uint32_t n : active_faults_[ev.a].touched_nodes) notify_node(n);
    log_event(EventKind::chaos_start, w.def_idx, 0);
  }

  void handle_chaos_end(const SimEvent& ev) {
    const ChaosWindow& w = chaos_windows_[ev.a];
    chaos_revert(world_, active_faults_[ev.a]);
    for (std::uint32_t n : active_faults_[ev.a].touched_nodes) notify_node(n);
    log_event(EventKind::chaos_end, w.def_idx, 0);
  }

  void handle_remediator_tick(const SimEvent&) {
    if (!on_remediator_) return;
    int actions = on_remediator_(world_.clock);
    // Bare ticks stay out of the log so a noop strategy is
    // indistinguishable from remediation turned off.
    if (actions > 0) log_event(EventKind::remediator_tick, static_cast<std::uint64_t>(actions), 0);
  }

  void handle_state_change(const SimEvent& ev) {
    WorkerInstance& inst = world_.instances[ev.a];
    WorkerPhase target = static_cast<WorkerPhase>(ev.b);
    if (target != WorkerPhase::accepting) throw InternalError("unexpected scheduled state change");
    if (inst.phase != WorkerPhase::starting) return;  // already drained away
    inst.phase = WorkerPhase::accepting;
    WorldNode& node = world_.nodes[inst.node];
    node.starting_instances -= 1;
    notify_node(inst.node);
    log_event(EventKind::worker_state_change, inst.idx,
              static_cast<std::uint64_t>(WorkerPhase::accepting));
    dispatch_work();
  }

  void handle_phase_boundary(const SimEvent& ev) {
    log_event(EventKind::phase_boundary, ev.a, 0);
    if (ev.a != 2) return;
    // Run end: whatever is still on the wire, queued, or mid-service counts
    // as dropped.
    if (!world_.conservation_holds())
      throw InternalError("message conservation violated at tear-down");
    std::uint64_t leftovers = world_.queued_messages() + world_.ledger.in_service;
    dropped_at_teardown_ = leftovers;
    world_.ledger.dropped += leftovers;
    world_.ledger.in_flight_to_broker = 0;
    world_.ledger.in_service = 0;
    for (WorldBroker& b : world_.brokers) b.queue.clear();
    for (WorkerInstance& inst : world_.instances) {
      if (inst.busy) {
        inst.busy = false;
        WorldNode& node = world_.nodes[inst.node];
        node.busy_instances -= 1;
        notify_node(inst.node);
      }
    }
    finished_ = true;
  }

  // --- worker mechanics -----------------------------------------------------

  std::uint32_t spawn_instance(std::uint32_t logical_idx, std::uint32_t node_idx,
                               std::uint32_t model_idx, SimTime accept_at) {
    LogicalWorker& lw = world_.logical_workers[logical_idx];
    WorkerInstance inst;
    inst.idx = static_cast<std::uint32_t>(world_.instances.size());
    inst.id = lw.id + ".g" + std::to_string(lw.generation) + "." +
              std::to_string(instance_ordinal_[logical_idx]++);
    inst.logical = logical_idx;
    inst.generation = lw.generation;
    inst.node = node_idx;
    inst.model = model_idx;
    inst.phase = WorkerPhase::starting;
    world_.instances.push_back(inst);
    lw.instances.push_back(inst.idx);

    WorldNode& node = world_.nodes[node_idx];
    node.starting_instances += 1;
    node.running_instances += 1;
    notify_node(node_idx);
    log_event(EventKind::worker_state_change, inst.idx,
              static_cast<std::uint64_t>(WorkerPhase::starting));
    schedule(accept_at, EventKind::worker_state_change, inst.idx,
             static_cast<std::uint64_t>(WorkerPhase::accepting));
    return inst.idx;
  }

  /// Begins shutting an instance down. Returns when its drain ends (now, if
  /// it was idle or the drop policy discarded its in-flight message).
  SimTime drain_instance(std::uint32_t idx) {
    WorkerInstance& inst = world_.instances[idx];
    if (inst.phase == WorkerPhase::stopped) return world_.clock;
    if (inst.busy && cfg_.system.drain_policy == DrainPolicy::finish_in_flight) {
      inst.phase = WorkerPhase::draining;
      log_event(EventKind::worker_state_change, inst.idx,
                static_cast<std::uint64_t>(WorkerPhase::draining));
      return inst.busy_until;
    }
    if (inst.busy) {  // drop policy: the in-flight message is lost
      inst.busy = false;
      inst.busy_token += 1;  // orphan the scheduled completion
      world_.ledger.in_service -= 1;
      world_.ledger.dropped += 1;
      WorldNode& node = world_.nodes[inst.node];
      node.busy_instances -= 1;
    }
    stop_instance(idx);
    return world_.clock;
  }

  void stop_instance(std::uint32_t idx) {
    WorkerInstance& inst = world_.instances[idx];
    WorldNode& node = world_.nodes[inst.node];
    if (inst.phase == WorkerPhase::starting) node.starting_instances -= 1;
    inst.phase = WorkerPhase::stopped;
    node.running_instances -= 1;
    notify_node(inst.node);
    LogicalWorker& lw = world_.logical_workers[inst.logical];
    lw.instances.erase(std::remove(lw.instances.begin(), lw.instances.end(), idx),
                       lw.instances.end());
    log_event(EventKind::worker_state_change, idx, static_cast<std::uint64_t>(WorkerPhase::stopped));
  }

  bool subscribed(const WorkerInstance& inst, const WorldBroker& broker) const {
    const WorldNode& node = world_.nodes[inst.node];
    if (node.role == NodeRole::cloud) return true;  // cloud consumes from every broker
    return broker.zone == node.zone;                // edge consumes locally only
  }

  Duration zone_transit(std::uint32_t from_zone, std::uint32_t to_zone, double size_kb) const {
    if (from_zone == to_zone) return cfg_.infrastructure.intra_zone_transit;
    const WorldLink* link = world_.find_link(from_zone, to_zone);
    if (link == nullptr) throw InternalError("route without a link escaped validation");
    return transit_delay(*link, size_kb);
  }

  /// Matches idle accepting workers to queued messages. Workers are visited
  /// in registration order; each picks the earliest-produced message across
  /// its subscribed brokers.
  void dispatch_work() {
    for (WorkerInstance& inst : world_.instances) {
      if (inst.phase != WorkerPhase::accepting || inst.busy) continue;
      WorldBroker* best = nullptr;
      for (WorldBroker& broker : world_.brokers) {
        if (broker.queue.empty() || !subscribed(inst, broker)) continue;
        if (best == nullptr) {
          best = &broker;
          continue;
        }
        const Message& cand = broker.queue.front();
        const Message& cur = best->queue.front();
        if (cand.produced_at < cur.produced_at ||
            (cand.produced_at == cur.produced_at && cand.id < cur.id))
          best = &broker;
      }
      if (best == nullptr) continue;

      Message msg = best->queue.front();
      best->queue.pop_front();
      best->dequeued += 1;

      WorldNode& node = world_.nodes[inst.node];
      Duration fetch = zone_transit(best->zone, node.zone, msg.size_kb);
      Duration service = contention_service_time(world_.models[inst.model].base_service_time, node);
      inst.busy = true;
      inst.busy_token = ++token_counter_;
      inst.in_flight = msg;
      inst.in_flight_assigned_at = world_.clock;
      inst.busy_until = world_.clock + fetch + service;
      world_.ledger.in_service += 1;
      node.busy_instances += 1;
      notify_node(inst.node);
      schedule(inst.busy_until, EventKind::service_complete, inst.idx, inst.busy_token);
    }
  }

  void notify_node(std::uint32_t node_idx) {
    if (observer_)
      observer_->node_utilization(node_idx, world_.clock, world_.nodes[node_idx].utilization());
  }

  // --- rendering ------------------------------------------------------------

  ojson render_event(const EventLogRecord& r) const {
    ojson j = ojson::object();
    j["time_ms"] = r.t.as_millis();
    j["kind"] = to_string(r.kind);
    switch (r.kind) {
      case EventKind::produce:
        j["msg"] = r.a;
        j["producer"] = r.b;
        break;
      case EventKind::transit_arrive:
        j["msg"] = r.a;
        j["broker"] = world_.zones[static_cast<std::size_t>(r.b)];
        break;
      case EventKind::service_complete:
        j["msg"] = r.a;
        j["worker"] = world_.instances[r.b].id;
        break;
      case EventKind::chaos_start:
      case EventKind::chaos_end:
        j["chaos"] = r.a;
        break;
      case EventKind::remediator_tick:
        j["actions"] = r.a;
        break;
      case EventKind::worker_state_change:
        j["worker"] = world_.instances[r.a].id;
        j["state"] = to_string(static_cast<WorkerPhase>(r.b));
        break;
      case EventKind::phase_boundary:
        j["phase"] = r.a == 0 ? "warmup_end" : (r.a == 1 ? "evaluation_end" : "run_end");
        break;
      case EventKind::sample_tick:
        break;
    }
    return j;
  }

  ScenarioConfig cfg_;
  World world_;
  SplitMix64 root_rng_;
  std::vector<SplitMix64> producer_rng_;
  std::vector<std::uint32_t> broker_for_producer_;
  std::vector<Message> messages_;
  std::vector<ChaosWindow> chaos_windows_;
  std::vector<ActiveFault> active_faults_;
  std::map<std::uint32_t, std::uint64_t> instance_ordinal_;

  std::priority_queue<SimEvent, std::vector<SimEvent>, EventCmp> queue_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t token_counter_ = 0;
  std::uint64_t dropped_at_teardown_ = 0;
  bool finished_ = false;

  WorldObserver* observer_ = nullptr;
  std::function<void(SimTime)> on_sample_;
  std::function<int(SimTime)> on_remediator_;
  std::vector<EventLogRecord> event_log_;
};

}  // namespace ecoscape
