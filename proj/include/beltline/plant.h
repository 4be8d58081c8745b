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
#include <vector>

#include "beltline/object.h"

namespace beltline {

/// Nameplate constants of the gear motor. Speeds are at the output shaft,
/// after the 1:34 gearbox, where the encoder is mounted.
struct MotorConstants {
  double max_rpm = 110.0;
  double tau_s = 0.3;            // first-order lag of the speed response
  double pulses_per_rev = 748.0;

  bool operator==(const MotorConstants&) const = default;
};

struct MotorState {
  double omega_out = 0.0;      // rpm, 0..max_rpm
  double encoder_accum = 0.0;  // fractional pulses not yet emitted
  int duty = 0;                // last applied PWM byte
};

struct BeltGeometry {
  double length_cm = 50.0;
  double width_cm = 4.0;
  double pulley_radius_cm = 5.82;
  double sensor_pos_cm = 20.0;
  double inspect_pos_cm = 20.56;

  /// Throws RangeError unless 0 < sensor_pos <= inspect_pos < length.
  void validate() const;

  bool operator==(const BeltGeometry&) const = default;
};

struct SensorState {
  bool blocked = false;
  bool prev_blocked = false;

  bool rising_edge() const { return blocked && !prev_blocked; }
};

struct Illumination {
  int nivel = 255;
  double relative_lux = 1.0;
};

inline constexpr int kDutyMax = 255;

/// Advances the motor by dt under a constant duty. The lag is integrated
/// exactly, so one long step equals many short ones.
MotorState motor_step(const MotorState& state, int duty, double dt_s,
                      const MotorConstants& motor = {});

/// Converts the shaft speed held over dt into whole encoder pulses. The
/// fractional remainder stays in `state.encoder_accum`.
std::int64_t encoder_pulses(MotorState& state, double dt_s,
                            const MotorConstants& motor = {});

double belt_speed_cmps(double omega_rpm, const BeltGeometry& geom);

struct BeltAdvance {
  double belt_speed_cmps = 0.0;
  std::vector<ObjectInstance> exited;  // despawned this step, in belt order
};

/// Moves every object by belt_speed * dt and removes those whose trailing
/// edge has left the belt.
BeltAdvance belt_advance(std::vector<ObjectInstance>& objects,
                         double omega_rpm, const BeltGeometry& geom,
                         double dt_s);

/// Point beam at geom.sensor_pos_cm; an object blocks it when its closed
/// span [x - length, x] contains the beam.
SensorState sensor_sample(const std::vector<ObjectInstance>& objects,
                          const BeltGeometry& geom, const SensorState& sensor);

/// Index of the object blocking the beam, or -1.
int blocking_object(const std::vector<ObjectInstance>& objects,
                    const BeltGeometry& geom);

/// Linear PWM-byte to light map. Throws RangeError outside 0..255.
Illumination set_illumination(int nivel);

}  // namespace beltline
