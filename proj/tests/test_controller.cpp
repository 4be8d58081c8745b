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

#include <algorithm>
#include <cmath>

#include "doctest.h"

#include "beltline/controller.h"
#include "beltline/error.h"

using namespace beltline;

namespace {

struct Trace {
  std::vector<double> per_period;  // pulses measured each control period
};

// Closed loop of PID + motor + encoder, same ordering as the service loop.
Trace closed_loop(const ControllerParams& p, int periods) {
  MotorState m;
  PidState s;
  int duty = 0;
  std::int64_t acc = 0;
  Trace tr;
  for (int t = 1; t <= periods * p.control_period_ms; ++t) {
    m = motor_step(m, duty, 0.001);
    acc += encoder_pulses(m, 0.001);
    if (t % p.control_period_ms == 0) {
      tr.per_period.push_back(double(acc));
      auto out = pid_step(p, double(acc), s);
      s = out.state;
      duty = out.duty;
      acc = 0;
    }
  }
  return tr;
}

SensorState edge() { return SensorState{true, false}; }
SensorState clear() { return SensorState{false, false}; }

}  // namespace

TEST_SUITE("controller") {

TEST_CASE("defaults") {
  const ControllerParams p;
  CHECK(p.setpoint == 200.0);
  CHECK(p.nivel_luz == 255);
  CHECK(p.t_espera_ms == 6000);
  CHECK(p.time_trig_us == 2000);
  CHECK(set_params(p, {}) == p);
}

TEST_CASE("pure proportional") {
  ControllerParams p;
  p.kp = 1.0;
  p.ki = 0.0;
  p.kd = 0.0;
  p.setpoint = 10.0;
  const auto out = pid_step(p, 0.0, {});
  CHECK(out.duty == 10);
}

TEST_CASE("saturation freezes the integrator") {
  ControllerParams p;
  PidState s;
  s.integrator = 12.0;
  const auto down = pid_step(p, 1e6, s);  // e hugely negative
  CHECK(down.duty == 0);
  CHECK(down.state.integrator == 12.0);
  const auto up = pid_step(p, -1e6, s);   // e hugely positive
  CHECK(up.duty == 255);
  CHECK(up.saturated);
  CHECK(up.state.integrator == 12.0);
}

TEST_CASE("integrator stays inside the anti-windup bound") {
  ControllerParams p;
  PidState s;
  const double bound = (p.u_max - p.u_min) / p.ki;
  for (int i = 0; i < 1000; ++i) {
    const double meas = (i / 50) % 2 ? 0.0 : 400.0;
    s = pid_step(p, meas, s).state;
    REQUIRE(std::fabs(s.integrator) <= bound + 1e-9);
  }
}

TEST_CASE("shipped gains reach 200 pulses/period before Tespera") {
  const ControllerParams p;
  const auto tr = closed_loop(p, 400);  // 60 s
  const int wait_periods = p.t_espera_ms / p.control_period_ms;
  int last_out = -1;
  for (int i = 0; i < int(tr.per_period.size()); ++i)
    if (std::fabs(tr.per_period[i] - p.setpoint) > 0.02 * p.setpoint) last_out = i;
  CHECK(last_out < wait_periods);
  const double peak = *std::max_element(tr.per_period.begin(), tr.per_period.end());
  CHECK((peak - p.setpoint) / p.setpoint < 0.20);
}

TEST_CASE("steady state within 2% for setpoints 50..200") {
  for (double sp : {50.0, 80.0, 100.0, 150.0, 200.0}) {
    ControllerParams p;
    p.setpoint = sp;
    const auto tr = closed_loop(p, 300);
    for (std::size_t i = 100; i < tr.per_period.size(); ++i)
      REQUIRE(std::fabs(tr.per_period[i] - sp) <= 0.02 * sp);
    const double peak = *std::max_element(tr.per_period.begin(), tr.per_period.end());
    CHECK((peak - sp) / sp < 0.20);
  }
}

TEST_CASE("supervisor phases") {
  const ControllerParams p;
  ControllerState s;
  auto step = supervisor_tick(s, p, edge(), 1.0, 0.0);
  CHECK(step.state.phase == Phase::Stabilizing);
  CHECK_FALSE(step.pulse);

  SUBCASE("no pulses while stabilizing, armed after Tespera") {
    s = step.state;
    int pulses = 0;
    for (int t = 1; t <= 6000; ++t) {
      auto st = supervisor_tick(s, p, t % 100 == 0 ? edge() : clear(), 1.0, t);
      pulses += st.pulse.has_value();
      s = st.state;
    }
    CHECK(pulses == 0);
    CHECK(s.phase == Phase::Armed);
  }

  SUBCASE("edges 1 ms apart give one pulse") {
    s = step.state;
    s.phase = Phase::Armed;
    auto a = supervisor_tick(s, p, edge(), 1.0, 10.0);
    REQUIRE(a.pulse);
    CHECK(a.pulse->width_us == 2000);
    CHECK(a.pulse->start_ms == 10.0);
    CHECK(a.state.phase == Phase::Triggering);
    auto b = supervisor_tick(a.state, p, edge(), 1.0, 11.0);
    CHECK_FALSE(b.pulse);
    auto c = supervisor_tick(b.state, p, clear(), 1.0, 12.0);
    CHECK(c.state.phase == Phase::Armed);
    CHECK(c.state.trigger_remaining_us == 0.0);
  }
}

TEST_CASE("set_params validates atomically") {
  const ControllerParams p;
  ParamsPatch bad;
  bad.kp = 2.0;
  bad.nivel_luz = 300;
  CHECK_THROWS_AS(set_params(p, bad), RangeError);
  try {
    set_params(p, bad);
  } catch (const RangeError& e) {
    CHECK(e.field() == "nivel_luz");
  }
  ParamsPatch ok;
  ok.nivel_luz = 128;
  CHECK(set_params(p, ok).nivel_luz == 128);
  for (auto f : {+[](ParamsPatch& x) { x.t_espera_ms = -1; },
                 +[](ParamsPatch& x) { x.time_trig_us = 0; },
                 +[](ParamsPatch& x) { x.control_period_ms = 0; },
                 +[](ParamsPatch& x) { x.u_min = 255.0; }}) {
    ParamsPatch x;
    f(x);
    CHECK_THROWS_AS(set_params(p, x), RangeError);
  }
}

TEST_CASE("setpoint change while armed re-enters Stabilizing") {
  Controller c;
  for (int t = 0; t <= 6001; ++t) c.tick(clear(), 1.0, t);
  REQUIRE(c.state().phase == Phase::Armed);
  ParamsPatch patch;
  patch.setpoint = 100.0;
  c.apply(patch);
  CHECK(c.state().phase == Phase::Stabilizing);
  CHECK(c.state().phase_timer_ms == 0.0);

  ParamsPatch light;
  light.nivel_luz = 10;
  for (int t = 0; t <= 6001; ++t) c.tick(clear(), 1.0, t);
  c.apply(light);
  CHECK(c.state().phase == Phase::Armed);  // only the setpoint re-stabilizes
}

TEST_CASE("rejected patch leaves the controller untouched") {
  Controller c;
  ParamsPatch bad;
  bad.setpoint = 120.0;
  bad.nivel_luz = 300;
  CHECK_THROWS_AS(c.apply(bad), RangeError);
  CHECK(c.params() == ControllerParams{});
}

TEST_CASE("indicators") {
  CHECK(indicate(Outcome::Pass).green);
  CHECK_FALSE(indicate(Outcome::Pass).red);
  CHECK(indicate(Outcome::Fail).red);
  CHECK_FALSE(indicate(Outcome::Fail).green);
  Controller c;
  c.show(Outcome::Pass);
  c.show(Outcome::Pass);
  CHECK(c.state().green_led);
  CHECK_FALSE(c.state().red_led);
}

}  // TEST_SUITE
