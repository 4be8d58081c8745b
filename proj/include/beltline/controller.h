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

#include <optional>
#include <string_view>

#include "beltline/plant.h"

namespace beltline {

enum class Phase { Init, Stabilizing, Armed, Triggering };
enum class Outcome { Pass, Fail };

std::string_view to_string(Phase phase);
std::string_view to_string(Outcome outcome);
std::optional<Outcome> parse_outcome(std::string_view text);

/// Supervisor parameters. The first four mirror the firmware globals
/// (Setpoint, NivelLuz, Tespera, Timetrig); the rest were unpublished and
/// are tuned against the simulated plant.
struct ControllerParams {
  double setpoint = 200.0;  // encoder pulses per control period
  int nivel_luz = 255;
  int t_espera_ms = 6000;
  int time_trig_us = 2000;
  double kp = 0.55;
  double ki = 0.35;
  double kd = 0.1;
  int control_period_ms = 150;
  double u_min = 0.0;
  double u_max = 255.0;

  /// Throws RangeError naming the first offending field.
  void validate() const;

  bool operator==(const ControllerParams&) const = default;
};

/// Partial update; unset fields keep their current value.
struct ParamsPatch {
  std::optional<double> setpoint;
  std::optional<int> nivel_luz;
  std::optional<int> t_espera_ms;
  std::optional<int> time_trig_us;
  std::optional<double> kp, ki, kd;
  std::optional<int> control_period_ms;
  std::optional<double> u_min, u_max;
};

struct PidState {
  double integrator = 0.0;
  double prev_error = 0.0;
};

struct ControllerState {
  Phase phase = Phase::Init;
  PidState pid;
  double phase_timer_ms = 0.0;
  double trigger_remaining_us = 0.0;
  bool green_led = false;
  bool red_led = false;
};

struct TriggerPulse {
  double start_ms = 0.0;
  int width_us = 0;
  std::uint64_t object_id = 0;
};

struct PidOutput {
  int duty = 0;
  PidState state;
  bool saturated = false;
};

/// One positional PID update with conditional anti-windup: the error is
/// integrated only when the resulting command is inside [u_min, u_max].
PidOutput pid_step(const ControllerParams& params, double measured_pulses,
                   const PidState& state);

struct SupervisorStep {
  ControllerState state;
  std::optional<TriggerPulse> pulse;
};

/// Advances the supervisor state machine by dt_ms. `now_ms` stamps any
/// pulse emitted on this tick.
SupervisorStep supervisor_tick(const ControllerState& state,
                               const ControllerParams& params,
                               const SensorState& sensor, double dt_ms,
                               double now_ms);

/// Validated merge. Throws RangeError and leaves nothing applied when any
/// field is out of range.
ControllerParams set_params(const ControllerParams& current,
                            const ParamsPatch& patch);

struct Indicators {
  bool green = false;
  bool red = false;
};

Indicators indicate(Outcome verdict);

/// Params plus state with the re-stabilization rule applied on setpoint
/// changes. This is what the simulation loop owns.
class Controller {
 public:
  explicit Controller(ControllerParams params = {});

  const ControllerParams& params() const { return params_; }
  const ControllerState& state() const { return state_; }

  /// Applies a patch; a setpoint change drops back to Stabilizing with the
  /// wait timer reset.
  void apply(const ParamsPatch& patch);

  std::optional<TriggerPulse> tick(const SensorState& sensor, double dt_ms,
                                   double now_ms);
  int control(double measured_pulses);
  void show(Outcome verdict);

  /// Restart from Init, as after power-up.
  void reset();

 private:
  ControllerParams params_;
  ControllerState state_;
};

}  // namespace beltline
