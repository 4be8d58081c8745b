// Copyright 2026 The Beltline Authors
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

#include <filesystem>
#include <set>

#include "doctest.h"

#include "beltline/error.h"
#include "beltline/simulation.h"

using namespace beltline;

namespace {

SimConfig small(CaseKind kind, std::uint64_t objects, std::uint64_t seed = 1) {
  auto cfg = default_config();
  cfg.scenario.case_kind = kind;
  cfg.scenario.defect_model = default_defect_model(kind);
  cfg.run.object_count = objects;
  cfg.run.seed = seed;
  cfg.scenario.seed = seed;
  return cfg;
}

void step_until(Simulation& sim, std::int64_t t_ms) {
  while (sim.now_ms() < t_ms && sim.step()) {
  }
}

}  // namespace

TEST_SUITE("simulation") {

TEST_CASE("zero duration inspects nothing") {
  auto cfg = default_config();
  cfg.run.object_count.reset();
  cfg.run.duration_s = 0.0;
  const auto s = run(cfg);
  CHECK(s.inspected == 0);
  CHECK_FALSE(s.sensitivity_pct);
}

TEST_CASE("one verdict per object, in pipeline order") {
  Simulation sim(small(CaseKind::B, 40));
  const auto s = sim.run_to_end();
  CHECK(sim.finished());
  CHECK_FALSE(sim.timed_out());
  CHECK(s.inspected == 40);
  CHECK(s.counts.total() == sim.log().size());
  std::set<std::uint64_t> ids;
  double prev_log = 0.0;
  for (const auto& e : sim.log().events()) {
    CHECK(ids.insert(e.object_id).second);
    const auto& tl = e.timeline;
    CHECK(tl.edge_ms <= tl.trigger_ms);
    CHECK(tl.trigger_ms <= tl.capture_ms);
    CHECK(tl.capture_ms <= tl.verdict_ms);
    CHECK(tl.verdict_ms <= e.t_ms);
    CHECK(tl.capture_ms - tl.trigger_ms < 16.67);
    CHECK(e.latency_ms == doctest::Approx(tl.verdict_ms - tl.trigger_ms));
    CHECK(e.t_ms >= prev_log);
    prev_log = e.t_ms;
  }
  CHECK(ids.size() == 40);
  const auto c = sim.counters();
  CHECK(c.sensor_edges == 40);
  CHECK(c.pulses == 40);
  CHECK(c.captures == 40);
  CHECK(c.missed_triggers == 0);
  CHECK(c.uninspected == 0);
}

TEST_CASE("summary from the loop equals the summary from its log") {
  Simulation sim(small(CaseKind::A, 30));
  const auto live = sim.run_to_end();
  CHECK(live == summarize(sim.log()));
  CHECK(summarize(EventLog::parse(sim.log().serialize())) == live);
}

TEST_CASE("identical config and seed give identical logs") {
  Simulation a(small(CaseKind::C, 25, 5));
  Simulation b(small(CaseKind::C, 25, 5));
  a.run_to_end();
  b.run_to_end();
  CHECK(a.log().serialize() == b.log().serialize());
  Simulation c(small(CaseKind::C, 25, 6));
  c.run_to_end();
  CHECK(a.log().serialize() != c.log().serialize());
}

TEST_CASE("no objects are fed before the line is armed") {
  Simulation sim(small(CaseKind::A, 5));
  sim.start();
  step_until(sim, 5999);
  CHECK(sim.controller().state().phase == Phase::Stabilizing);
  CHECK(sim.objects().empty());
  step_until(sim, 6005);
  CHECK(sim.controller().state().phase == Phase::Armed);
  CHECK(sim.objects().size() == 1);
}

TEST_CASE("nothing happens before start") {
  Simulation sim(small(CaseKind::A, 5));
  for (int i = 0; i < 100; ++i) CHECK(sim.step());
  CHECK(sim.now_ms() == 0);
  CHECK(sim.telemetry().phase == Phase::Init);
}

TEST_CASE("parameter patches show up in telemetry") {
  Simulation sim(small(CaseKind::A, 50));
  sim.start();
  step_until(sim, 7000);
  REQUIRE(sim.telemetry().phase != Phase::Stabilizing);

  ParamsPatch light;
  light.nivel_luz = 128;
  sim.set_params(light);
  sim.step();
  CHECK(sim.telemetry().nivel_luz == 128);

  ParamsPatch bad;
  bad.nivel_luz = 300;
  CHECK_THROWS_AS(sim.set_params(bad), RangeError);
  CHECK(sim.telemetry().nivel_luz == 128);

  ParamsPatch speed;
  speed.setpoint = 100.0;
  sim.set_params(speed);
  sim.step();
  CHECK(sim.telemetry().phase == Phase::Stabilizing);
  CHECK(sim.telemetry().setpoint == 100.0);
  step_until(sim, sim.now_ms() + 5990);
  CHECK(sim.telemetry().phase == Phase::Stabilizing);
  step_until(sim, sim.now_ms() + 20);
  CHECK(sim.telemetry().phase != Phase::Stabilizing);
}

TEST_CASE("objects passing while re-stabilizing leave uninspected and the run still ends") {
  Simulation sim(small(CaseKind::A, 60));
  sim.start();
  step_until(sim, 8000);
  ParamsPatch speed;
  speed.setpoint = 150.0;
  sim.set_params(speed);
  sim.run_to_end();
  CHECK(sim.finished());
  CHECK_FALSE(sim.timed_out());
  const auto c = sim.counters();
  CHECK(c.uninspected > 0);
  CHECK(c.verdicts + c.uninspected == 60);
}

TEST_CASE("stop ends the run and marks telemetry terminal") {
  Simulation sim(small(CaseKind::A, 100));
  sim.start();
  step_until(sim, 9000);
  sim.stop();
  CHECK(sim.finished());
  CHECK_FALSE(sim.step());
  const auto t = sim.telemetry();
  CHECK(t.terminal);
  CHECK_FALSE(t.running);
  CHECK(t.summary.inspected == sim.log().size());
  sim.start();  // a fresh run
  CHECK(sim.now_ms() == 0);
  CHECK(sim.log().size() == 0);
}

TEST_CASE("a stalled belt hits the time cap instead of hanging") {
  auto cfg = small(CaseKind::A, 2);
  cfg.controller.setpoint = 0.0;
  Simulation sim(cfg);
  sim.run_to_end();
  CHECK(sim.timed_out());
  CHECK(sim.log().size() == 0);
}

TEST_CASE("sensor latency delays the edge") {
  auto cfg = small(CaseKind::B, 10);
  cfg.plant.sensor_latency_ms = 3;
  Simulation sim(cfg);
  const auto s = sim.run_to_end();
  CHECK(s.inspected == 10);
  for (const auto& e : sim.log().events()) CHECK(e.timeline.edge_ms <= e.timeline.trigger_ms);
}

TEST_CASE("scenario switch applies to newly fed objects") {
  Simulation sim(small(CaseKind::A, 30));
  sim.start();
  step_until(sim, 7000);
  sim.set_scenario(CaseKind::C);
  sim.run_to_end();
  std::set<CaseKind> kinds;
  std::uint64_t prev = 0;
  for (const auto& e : sim.log().events()) {
    kinds.insert(e.case_kind);
    CHECK(e.object_id > prev);
    prev = e.object_id;
  }
  CHECK(kinds.count(CaseKind::A));
  CHECK(kinds.count(CaseKind::C));
  CHECK(sim.log().size() == 30);
}

TEST_CASE("captured frames are dumped as PGM") {
  const auto dir = std::filesystem::temp_directory_path() / "beltline_frames_test";
  std::filesystem::remove_all(dir);
  auto cfg = small(CaseKind::C, 3);
  cfg.camera.dump_dir = dir.string();
  Simulation sim(cfg);
  sim.run_to_end();
  for (const auto& e : sim.log().events()) {
    const auto f = read_pgm(dir / ("frame_" + std::to_string(e.object_id) + ".pgm"));
    CHECK(f.width() == 640);
    CHECK(f.height() == 480);
  }
  REQUIRE(sim.latest_frame());
  CHECK(sim.latest_frame()->object_id == 3);
  std::filesystem::remove_all(dir);
}

TEST_CASE("telemetry is monotone in time") {
  Simulation sim(small(CaseKind::A, 10));
  sim.start();
  double prev = -1.0;
  while (sim.step()) {
    if (sim.now_ms() % 100) continue;
    const auto t = sim.telemetry();
    CHECK(t.t_ms > prev);
    prev = t.t_ms;
  }
}

}  // TEST_SUITE
