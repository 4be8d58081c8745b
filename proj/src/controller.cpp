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

#include "beltline/controller.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "beltline/error.h"

namespace beltline {

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::Init: return "Init";
    case Phase::Stabilizing: return "Stabilizing";
    case Phase::Armed: return "Armed";
    case Phase::Triggering: return "Triggering";
  }
  return "?";
}

std::string_view to_string(Outcome outcome) {
  return outcome == Outcome::Pass ? "pass" : "fail";
}

std::optional<Outcome> parse_outcome(std::string_view text) {
  if (text == "pass") return Outcome::Pass;
  if (text == "fail") return Outcome::Fail;
  return std::nullopt;
}

void ControllerParams::validate() const {
  if (!std::isfinite(setpoint) || setpoint < 0.0)
    throw RangeError("setpoint", "setpoint must be a nonnegative number");
  if (nivel_luz < 0 || nivel_luz > 255)
    throw RangeError("nivel_luz", "nivel_luz " + std::to_string(nivel_luz) +
                                      " outside 0..255");
  if (t_espera_ms < 0)
    throw RangeError("t_espera_ms", "t_espera_ms must be >= 0");
  if (time_trig_us <= 0)
    throw RangeError("time_trig_us", "time_trig_us must be > 0");
  if (!std::isfinite(kp) || !std::isfinite(ki) || !std::isfinite(kd))
    throw RangeError("gains", "PID gains must be finite");
  if (ki < 0.0) throw RangeError("ki", "ki must be >= 0");
  if (control_period_ms <= 0)
    throw RangeError("control_period_ms", "control_period_ms must be > 0");
  if (!(u_min < u_max)) throw RangeError("u_min", "u_min must be below u_max");
  if (u_min < 0.0 || u_max > kDutyMax)
    throw RangeError("u_max", "duty clamps must lie within 0..255");
}

PidOutput pid_step(const ControllerParams& p, double measured_pulses,
                   const PidState& state) {
  const double e = p.setpoint - measured_pulses;
  const double de = e - state.prev_error;

  PidOutput out;
  out.state = state;
  out.state.prev_error = e;

  const double trial = p.kp * e + p.ki * (state.integrator + e) + p.kd * de;
  if (trial > p.u_min && trial < p.u_max) out.state.integrator += e;
  if (p.ki > 0.0) {
    const double bound = (p.u_max - p.u_min) / p.ki;
    out.state.integrator = std::clamp(out.state.integrator, -bound, bound);
  }

  const double u = p.kp * e + p.ki * out.state.integrator + p.kd * de;
  out.saturated = u <= p.u_min || u >= p.u_max;
  out.duty = static_cast<int>(std::lround(std::clamp(u, p.u_min, p.u_max)));
  return out;
}

SupervisorStep supervisor_tick(const ControllerState& state,
                               const ControllerParams& params,
                               const SensorState& sensor, double dt_ms,
                               double now_ms) {
  SupervisorStep step{state, std::nullopt};
  ControllerState& s = step.state;

  switch (s.phase) {
    case Phase::Init:
      // PID starts at once; the sensor stays disabled until the wait ends.
      s.phase = Phase::Stabilizing;
      s.phase_timer_ms = 0.0;
      break;
    case Phase::Stabilizing:
      s.phase_timer_ms += dt_ms;
      if (s.phase_timer_ms >= params.t_espera_ms) s.phase = Phase::Armed;
      break;
    case Phase::Armed:
      if (sensor.rising_edge()) {
        step.pulse = TriggerPulse{now_ms, params.time_trig_us, 0};
        s.phase = Phase::Triggering;
        s.trigger_remaining_us = params.time_trig_us;
      }
      break;
    case Phase::Triggering:
      s.trigger_remaining_us -= dt_ms * 1000.0;
      if (s.trigger_remaining_us <= 0.0) {
        s.trigger_remaining_us = 0.0;
        s.phase = Phase::Armed;
      }
      break;
  }
  return step;
}

ControllerParams set_params(const ControllerParams& current,
                            const ParamsPatch& patch) {
  ControllerParams next = current;
  if (patch.setpoint) next.setpoint = *patch.setpoint;
  if (patch.nivel_luz) next.nivel_luz = *patch.nivel_luz;
  if (patch.t_espera_ms) next.t_espera_ms = *patch.t_espera_ms;
  if (patch.time_trig_us) next.time_trig_us = *patch.time_trig_us;
  if (patch.kp) next.kp = *patch.kp;
  if (patch.ki) next.ki = *patch.ki;
  if (patch.kd) next.kd = *patch.kd;
  if (patch.control_period_ms) next.control_period_ms = *patch.control_period_ms;
  if (patch.u_min) next.u_min = *patch.u_min;
  if (patch.u_max) next.u_max = *patch.u_max;
  next.validate();
  return next;
}

Indicators indicate(Outcome verdict) {
  return verdict == Outcome::Pass ? Indicators{true, false}
                                  : Indicators{false, true};
}

Controller::Controller(ControllerParams params) : params_(params) {
  params_.validate();
}

void Controller::apply(const ParamsPatch& patch) {
  const ControllerParams next = set_params(params_, patch);
  const bool restabilize = next.setpoint != params_.setpoint;
  params_ = next;
  if (restabilize && state_.phase != Phase::Init) {
    state_.phase = Phase::Stabilizing;
    state_.phase_timer_ms = 0.0;
    state_.trigger_remaining_us = 0.0;
  }
}

std::optional<TriggerPulse> Controller::tick(const SensorState& sensor,
                                             double dt_ms, double now_ms) {
  auto step = supervisor_tick(state_, params_, sensor, dt_ms, now_ms);
  state_ = step.state;
  return step.pulse;
}

int Controller::control(double measured_pulses) {
  auto out = pid_step(params_, measured_pulses, state_.pid);
  state_.pid = out.state;
  return out.duty;
}

void Controller::show(Outcome verdict) {
  const auto leds = indicate(verdict);
  state_.green_led = leds.green;
  state_.red_led = leds.red;
}

void Controller::reset() { state_ = ControllerState{}; }

}  // namespace beltline
