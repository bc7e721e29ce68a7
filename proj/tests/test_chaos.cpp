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

#include <doctest.h>

#include <fstream>
#include <sstream>

#include "ecoscape/chaos.hpp"
#include "ecoscape/simcore.hpp"
#include "ecoscape/slo.hpp"

using namespace ecoscape;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ScenarioConfig minimal_cfg() {
  return parse_scenario(read_file(std::string(ECOSCAPE_SCENARIO_DIR) + "/minimal.json"));
}

ChaosDef delay_def(Duration latency) {
  ChaosDef def;
  def.kind = ChaosKind::network_delay;
  def.link_targets.emplace_back("edge", "cloud");
  def.new_latency = latency;
  return def;
}

ChaosDef stress_def(const std::string& node, int threads) {
  ChaosDef def;
  def.kind = ChaosKind::cpu_stress;
  def.node_targets.push_back(node);
  def.threads = threads;
  return def;
}

}  // namespace

TEST_CASE("apply then revert restores the exact link baseline") {
  Engine engine(minimal_cfg());
  World& world = engine.mutable_world();
  Duration baseline = world.links[0].current_latency;

  std::vector<ActiveFault> active;
  ActiveFault fault = chaos_apply(world, delay_def(Duration::millis(500)), active, SimTime());
  CHECK(world.links[0].current_latency == Duration::millis(500));
  chaos_revert(world, fault);
  CHECK(world.links[0].current_latency == baseline);
}

TEST_CASE("apply then revert restores the stress-thread count") {
  Engine engine(minimal_cfg());
  World& world = engine.mutable_world();
  std::vector<ActiveFault> active;
  ActiveFault fault = chaos_apply(world, stress_def("edge-node", 10), active, SimTime());
  CHECK(world.nodes[world.node_index.at("edge-node")].stress_threads == 10);
  CHECK(world.nodes[world.node_index.at("edge-node")].cpu_share() ==
        doctest::Approx(2.0 / 11.0).epsilon(1e-12));
  chaos_revert(world, fault);
  CHECK(world.nodes[world.node_index.at("edge-node")].stress_threads == 0);
}

TEST_CASE("double revert is a scheduler bug") {
  Engine engine(minimal_cfg());
  World& world = engine.mutable_world();
  std::vector<ActiveFault> active;
  ActiveFault fault = chaos_apply(world, stress_def("edge-node", 2), active, SimTime());
  chaos_revert(world, fault);
  CHECK_THROWS_AS(chaos_revert(world, fault), InternalError);
}

TEST_CASE("overlapping same-target faults are refused at apply time") {
  Engine engine(minimal_cfg());
  World& world = engine.mutable_world();
  std::vector<ActiveFault> active;
  active.push_back(chaos_apply(world, delay_def(Duration::millis(300)), active, SimTime()));
  CHECK_THROWS_AS(chaos_apply(world, delay_def(Duration::millis(400)), active, SimTime()),
                  InternalError);
  active.push_back(chaos_apply(world, stress_def("edge-node", 1), active, SimTime()));
  CHECK_THROWS_AS(chaos_apply(world, stress_def("edge-node", 3), active, SimTime()),
                  InternalError);
}

TEST_CASE("zero-duration chaos is SLI-indistinguishable from no chaos") {
  ScenarioConfig with_zero = minimal_cfg();
  ChaosDef def = stress_def("edge-node", 8);
  def.start_offset = Duration::seconds(2);
  def.duration = kZeroDuration;
  with_zero.chaos.push_back(def);
  ChaosDef net = delay_def(Duration::millis(700));
  net.start_offset = Duration::seconds(4);
  net.duration = kZeroDuration;
  with_zero.chaos.push_back(net);

  ScenarioConfig without = minimal_cfg();

  auto run_csv = [](const ScenarioConfig& cfg) {
    Engine engine(cfg);
    EnergyMeter meter(engine.world());
    engine.set_observer(&meter);
    SloSampler sampler(engine.cfg(), &engine.world(), &meter);
    engine.set_sample_hook([&](SimTime t) { sampler.on_sample(t); });
    engine.run_to_completion();
    return write_sli_csv(sampler.series());
  };
  CHECK(run_csv(with_zero) == run_csv(without));
}

TEST_CASE("fault windows stay inside the evaluation phase") {
  ScenarioConfig cfg = minimal_cfg();
  ChaosDef def = stress_def("edge-node", 4);
  def.start_offset = Duration::seconds(2);
  def.duration = std::nullopt;  // until tear-down
  cfg.chaos.push_back(def);
  ChaosDef late = stress_def("cloud-node", 2);
  late.start_offset = Duration::seconds(9999);  // clamps to evaluation end
  cfg.chaos.push_back(late);

  Engine engine(cfg);
  engine.run_to_completion();
  for (const EventLogRecord& r : engine.event_log()) {
    if (r.kind == EventKind::chaos_start || r.kind == EventKind::chaos_end) {
      CHECK(r.t >= cfg.warmup_end());
      CHECK(r.t <= cfg.eval_end());
    }
  }
  // The "until tear-down" fault is gone once the run ends.
  CHECK(engine.world().nodes[engine.world().node_index.at("edge-node")].stress_threads == 0);
}

TEST_CASE("network chaos raises transit for the whole window") {
  ScenarioConfig cfg = minimal_cfg();
  ChaosDef def = delay_def(Duration::millis(500));
  def.start_offset = kZeroDuration;
  def.duration = std::nullopt;
  cfg.chaos.push_back(def);

  Engine engine(cfg);
  SimTime eval_start = cfg.warmup_end();
  bool saw_chaos = false;
  while (!engine.finished()) {
    if (engine.world().clock > eval_start && engine.world().clock < cfg.eval_end()) {
      CHECK(engine.world().links[0].current_latency == Duration::millis(500));
      saw_chaos = true;
    }
    engine.step();
  }
  CHECK(saw_chaos);
  CHECK(engine.world().links[0].current_latency == Duration::millis(50));
}
