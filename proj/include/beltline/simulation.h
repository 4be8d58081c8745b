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

#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "beltline/camera.h"
#include "beltline/config.h"
#include "beltline/controller.h"
#include "beltline/metrics.h"
#include "beltline/plant.h"
#include "beltline/scenarios.h"

namespace beltline {

inline constexpr double kTickMs = 1.0;

/// Last captured frame, shared read-only with the service.
struct FrameRef {
  std::uint64_t object_id = 0;
  double capture_ms = 0.0;
  std::shared_ptr<const Frame> frame;
};

struct LastVerdict {
  std::uint64_t object_id = 0;
  Outcome outcome = Outcome::Fail;
  Truth truth = Truth::Good;
  double t_ms = 0.0;
};

struct TelemetryFrame {
  double t_ms = 0.0;
  Phase phase = Phase::Init;
  bool running = false;
  bool terminal = false;
  double belt_speed_cmps = 0.0;
  double pulses_per_period = 0.0;
  double setpoint = 0.0;
  int duty = 0;
  int nivel_luz = 255;
  bool green_led = false;
  bool red_led = false;
  CaseKind case_kind = CaseKind::A;
  std::optional<LastVerdict> last_verdict;
  ConfusionCounts counts;
  RunSummary summary;
  std::uint64_t uninspected = 0;
  std::optional<std::uint64_t> last_frame_ref;  // object id of the latest frame
  /// Object leading edges on the belt, cm, for the console animation.
  std::vector<double> object_x_cm;
};

/// Counters used by timing experiments.
struct LineCounters {
  std::uint64_t spawned = 0;
  std::uint64_t sensor_edges = 0;
  std::uint64_t pulses = 0;
  std::uint64_t captures = 0;
  std::uint64_t missed_triggers = 0;
  std::uint64_t verdicts = 0;
  std::uint64_t uninspected = 0;  // left the belt without a verdict
};

/// The whole station advanced in fixed 1 ms ticks. Single-owner: nothing in
/// here is thread-safe.
class Simulation {
 public:
  explicit Simulation(SimConfig cfg, std::shared_ptr<LineSink> sink = nullptr);

  /// Begin (or resume) ticking. After a stop the next start begins a fresh run.
  void start();
  /// End the run; the next snapshot is terminal.
  void stop();

  /// Validated atomically; throws RangeError and leaves state unchanged.
  void set_params(const ParamsPatch& patch);
  /// Objects fed from now on use the new case; ones already on the belt keep
  /// theirs.
  void set_scenario(CaseKind kind);

  /// Advances one tick if running. Returns false once the run has ended.
  bool step();
  /// Steps until the run ends. Returns the final summary.
  RunSummary run_to_end();

  bool running() const { return running_; }
  bool finished() const { return finished_; }
  /// True if the run was cut short by the simulated-time safety cap.
  bool timed_out() const { return timed_out_; }

  std::int64_t now_ms() const { return now_ms_; }
  const SimConfig& config() const { return cfg_; }
  const Controller& controller() const { return controller_; }
  const MotorState& motor() const { return motor_; }
  const std::vector<ObjectInstance>& objects() const { return objects_; }
  LineCounters counters() const;
  const EventLog& log() const { return log_; }
  RunSummary summary() const;
  double pulses_per_period() const { return last_period_pulses_; }
  const std::optional<FrameRef>& latest_frame() const { return latest_frame_; }

  TelemetryFrame telemetry() const;

 private:
  struct Track {
    Truth truth = Truth::Good;
    CaseKind case_kind = CaseKind::A;
    std::optional<double> edge_ms;
    std::optional<double> trigger_ms;
    std::optional<double> capture_ms;
    bool capture_scheduled = false;
    bool verdict_pending = false;
    bool on_belt = true;
  };
  struct PendingVerdict {
    std::int64_t at_us = 0;
    std::uint64_t object_id = 0;
    Verdict verdict;
  };

  void reset_run();
  void feed();
  void sense_and_trigger();
  void capture_due();
  void deliver_verdicts();
  void resolve(std::uint64_t id);
  bool done();

  SimConfig cfg_;
  std::shared_ptr<LineSink> sink_;
  std::map<CaseKind, InspectionRecipe> recipes_;

  MotorState motor_;
  Controller controller_;
  Camera camera_;
  ObjectStream stream_;
  EventLog log_;
  std::vector<ObjectInstance> objects_;
  SensorState sensor_;
  std::deque<std::pair<bool, std::uint64_t>> sensor_delay_;
  std::uint64_t blocking_id_ = 0;
  Illumination illum_;

  std::map<std::uint64_t, Track> tracks_;
  std::deque<PendingVerdict> verdicts_;
  std::optional<FrameRef> latest_frame_;
  std::optional<LastVerdict> last_verdict_;

  std::int64_t now_ms_ = 0;
  std::int64_t period_pulses_ = 0;
  int ticks_in_period_ = 0;
  double last_period_pulses_ = 0.0;
  double belt_speed_ = 0.0;
  bool running_ = false;
  bool finished_ = false;
  bool timed_out_ = false;
  bool feeding_ = false;
  std::uint64_t fed_ = 0;
  std::uint64_t resolved_ = 0;
  std::uint64_t sensor_edges_ = 0;
  std::uint64_t verdict_count_ = 0;
  std::uint64_t uninspected_ = 0;
  ConfusionCounts counts_;
  double last_event_ms_ = 0.0;
};

/// Headless run of a whole configuration: builds the station, starts it and
/// steps until the duration or object count is reached.
RunSummary run(const SimConfig& cfg, std::shared_ptr<LineSink> sink = nullptr);

/// Noise seed for an object's capture.
std::uint64_t frame_seed(std::uint64_t run_seed, std::uint64_t object_id);

}  // namespace beltline
