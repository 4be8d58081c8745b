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

#include "beltline/plant.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "beltline/error.h"

namespace beltline {

void BeltGeometry::validate() const {
  if (!(length_cm > 0.0)) throw RangeError("length_cm", "belt length must be positive");
  if (!(width_cm > 0.0)) throw RangeError("width_cm", "belt width must be positive");
  if (!(pulley_radius_cm > 0.0))
    throw RangeError("pulley_radius_cm", "pulley radius must be positive");
  if (!(sensor_pos_cm > 0.0))
    throw RangeError("sensor_pos_cm", "sensor must sit after the belt start");
  if (!(sensor_pos_cm <= inspect_pos_cm))
    throw RangeError("inspect_pos_cm", "inspection point must not precede the sensor");
  if (!(inspect_pos_cm < length_cm))
    throw RangeError("inspect_pos_cm", "inspection point must lie on the belt");
}

MotorState motor_step(const MotorState& state, int duty, double dt_s,
                      const MotorConstants& motor) {
  MotorState next = state;
  next.duty = std::clamp(duty, 0, kDutyMax);
  const double target = motor.max_rpm * next.duty / kDutyMax;
  const double decay = std::exp(-dt_s / motor.tau_s);
  next.omega_out = target + (state.omega_out - target) * decay;
  next.omega_out = std::clamp(next.omega_out, 0.0, motor.max_rpm);
  return next;
}

std::int64_t encoder_pulses(MotorState& state, double dt_s,
                            const MotorConstants& motor) {
  state.encoder_accum += motor.pulses_per_rev * (state.omega_out / 60.0) * dt_s;
  // Slack so a sum of steps that should land on an integer is not lost to
  // rounding.
  const double whole = std::floor(state.encoder_accum + 1e-9);
  state.encoder_accum -= whole;
  return static_cast<std::int64_t>(whole);
}

double belt_speed_cmps(double omega_rpm, const BeltGeometry& geom) {
  return omega_rpm * 2.0 * std::numbers::pi * geom.pulley_radius_cm / 60.0;
}

BeltAdvance belt_advance(std::vector<ObjectInstance>& objects,
                         double omega_rpm, const BeltGeometry& geom,
                         double dt_s) {
  BeltAdvance out;
  out.belt_speed_cmps = belt_speed_cmps(omega_rpm, geom);
  const double dx = out.belt_speed_cmps * dt_s;
  for (auto& obj : objects) obj.x_cm += dx;

  auto gone = std::stable_partition(
      objects.begin(), objects.end(),
      [&](const ObjectInstance& o) { return o.trailing_cm() <= geom.length_cm; });
  std::move(gone, objects.end(), std::back_inserter(out.exited));
  objects.erase(gone, objects.end());
  return out;
}

int blocking_object(const std::vector<ObjectInstance>& objects,
                    const BeltGeometry& geom) {
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto& o = objects[i];
    if (o.trailing_cm() <= geom.sensor_pos_cm && geom.sensor_pos_cm <= o.x_cm)
      return static_cast<int>(i);
  }
  return -1;
}

SensorState sensor_sample(const std::vector<ObjectInstance>& objects,
                          const BeltGeometry& geom, const SensorState& sensor) {
  return SensorState{blocking_object(objects, geom) >= 0, sensor.blocked};
}

Illumination set_illumination(int nivel) {
  if (nivel < 0 || nivel > 255)
    throw RangeError("nivel_luz", "nivel_luz " + std::to_string(nivel) +
                                      " outside 0..255");
  return Illumination{nivel, nivel / 255.0};
}

}  // namespace beltline
