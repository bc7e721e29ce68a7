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
#include <string>
#include <vector>

#include "ecoscape/config.hpp"
#include "ecoscape/errors.hpp"
#include "ecoscape/world.hpp"

namespace ecoscape {

/// A fault currently applied to the world, with enough saved state to put
/// things back exactly as they were.
struct ActiveFault {
  ChaosDef def;
  SimTime applied_at;
  bool active = false;
  std::vector<std::uint32_t> touched_links;       // indices into world.links
  std::vector<Duration> saved_latencies;          // parallel to touched_links
  std::vector<std::uint32_t> touched_nodes;       // indices into world.nodes
  std::vector<int> added_threads;                 // parallel to touched_nodes
};

/// Applies one scripted fault. Targets were validated at parse time;
/// conflicts here mean a scheduler bug, not a user error.
inline ActiveFault chaos_apply(World& world, const ChaosDef& def,
                               const std::vector<ActiveFault>& active, SimTime now) {
  ActiveFault fault;
  fault.def = def;
  fault.applied_at = now;
  fault.active = true;

  if (def.kind == ChaosKind::network_delay) {
    for (const auto& [za, zb] : def.link_targets) {
      auto ia = world.zone_index.find(za);
      auto ib = world.zone_index.find(zb);
      if (ia == world.zone_index.end() || ib == world.zone_index.end())
        throw InternalError("chaos apply: unknown zone in validated config");
      const WorldLink* link = world.find_link(ia->second, ib->second);
      if (link == nullptr) throw InternalError("chaos apply: missing link in validated config");
      std::uint32_t link_idx = static_cast<std::uint32_t>(link - world.links.data());
      for (const ActiveFault& other : active) {
        if (!other.active) continue;
        for (std::uint32_t l : other.touched_links)
          if (l == link_idx)
            throw InternalError("chaos apply: overlapping network_delay on one link");
      }
      fault.touched_links.push_back(link_idx);
      fault.saved_latencies.push_back(world.links[link_idx].current_latency);
      world.links[link_idx].current_latency = def.new_latency;
    }
  } else {
    for (const std::string& node_id : def.node_targets) {
      auto it = world.node_index.find(node_id);
      if (it == world.node_index.end())
        throw InternalError("chaos apply: unknown node in validated config");
      std::uint32_t node_idx = it->second;
      for (const ActiveFault& other : active) {
        if (!other.active) continue;
        for (std::uint32_t n : other.touched_nodes)
          if (n == node_idx) throw InternalError("chaos apply: overlapping cpu_stress on one node");
      }
      fault.touched_nodes.push_back(node_idx);
      fault.added_threads.push_back(def.threads);
      world.nodes[node_idx].stress_threads += def.threads;
    }
  }
  return fault;
}

/// Restores the exact saved baseline. Reverting a fault twice is a
/// scheduler bug and throws.
inline void chaos_revert(World& world, ActiveFault& fault) {
  if (!fault.active) throw InternalError("chaos revert: fault is not active");
  for (std::size_t i = 0; i < fault.touched_links.size(); ++i)
    world.links[fault.touched_links[i]].current_latency = fault.saved_latencies[i];
  for (std::size_t i = 0; i < fault.touched_nodes.size(); ++i)
    world.nodes[fault.touched_nodes[i]].stress_threads -= fault.added_threads[i];
  fault.active = false;
}

}  // namespace ecoscape
