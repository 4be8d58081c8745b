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

#include <cmath>
#include <random>

#include "doctest.h"

#include "beltline/error.h"
#include "beltline/plant.h"

using namespace beltline;

namespace {

ObjectInstance obj_at(double x, double len = 7.0, std::uint64_t id = 1) {
  ObjectInstance o;
  o.id = id;
  o.x_cm = x;
  o.length_cm = len;
  return o;
}

}  // namespace

TEST_SUITE("plant") {

TEST_CASE("motor at rest stays at rest") {
  MotorState m;
  for (double dt : {0.001, 0.1, 5.0}) {
    m = motor_step(m, 0, dt);
    CHECK(m.omega_out == 0.0);
  }
}

TEST_CASE("full duty settles at the rated 110 rpm") {
  MotorState m;
  for (int i = 0; i < 5000; ++i) m = motor_step(m, 255, 0.001);
  CHECK(m.omega_out == doctest::Approx(110.0).epsilon(1e-6));
}

TEST_CASE("first-order step response at one time constant") {
  MotorState m;
  for (int i = 0; i < 300; ++i) m = motor_step(m, 255, 0.001);
  CHECK(m.omega_out == doctest::Approx(110.0 * (1.0 - std::exp(-1.0))).epsilon(1e-9));
  // A single 0.3 s step lands in the same place: the update is exact.
  MotorState one = motor_step(MotorState{}, 255, 0.3);
  CHECK(one.omega_out == doctest::Approx(m.omega_out).epsilon(1e-9));
}

TEST_CASE("speed never exceeds the rating for any duty sequence") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> duty(0, 255);
  MotorState m;
  const BeltGeometry g;
  for (int i = 0; i < 20000; ++i) {
    m = motor_step(m, duty(rng), 0.001);
    REQUIRE(m.omega_out <= 110.0);
    REQUIRE(m.omega_out >= 0.0);
    REQUIRE(belt_speed_cmps(m.omega_out, g) <= 67.06);
  }
}

TEST_CASE("encoder: one revolution is 748 pulses") {
  MotorState m;
  m.omega_out = 60.0;  // 1 rev/s
  std::int64_t total = 0;
  for (int i = 0; i < 1000; ++i) total += encoder_pulses(m, 0.001);
  CHECK(total == 748);
}

TEST_CASE("encoder: 110 rpm for 1 s carries the fraction") {
  MotorState m;
  m.omega_out = 110.0;
  CHECK(encoder_pulses(m, 1.0) == 1371);
  CHECK(m.encoder_accum == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("encoder: zero speed gives no pulses") {
  MotorState m;
  CHECK(encoder_pulses(m, 10.0) == 0);
}

TEST_CASE("encoder pulse conservation over random partitions") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> piece(1e-4, 0.05);
  std::uniform_real_distribution<double> rpm(0.0, 110.0);
  for (int trial = 0; trial < 200; ++trial) {
    MotorState m;
    m.omega_out = rpm(rng);
    const double span = 2.0;
    double t = 0.0;
    std::int64_t total = 0;
    while (t < span) {
      const double dt = std::min(piece(rng), span - t);
      total += encoder_pulses(m, dt);
      t += dt;
    }
    const double exact = 748.0 * m.omega_out / 60.0 * span;
    REQUIRE(std::fabs(double(total) - exact) < 1.0 + 1e-9);
  }
}

TEST_CASE("belt speed from pulley radius") {
  const BeltGeometry g;
  CHECK(belt_speed_cmps(110.0, g) == doctest::Approx(67.04).epsilon(1e-3));
  CHECK(belt_speed_cmps(0.0, g) == 0.0);
}

TEST_CASE("belt_advance moves and despawns") {
  const BeltGeometry g;
  std::vector<ObjectInstance> objs{obj_at(49.0, 2.0)};
  SUBCASE("dt = 0 leaves positions alone") {
    auto r = belt_advance(objs, 110.0, g, 0.0);
    CHECK(objs.size() == 1);
    CHECK(objs[0].x_cm == 49.0);
    CHECK(r.exited.empty());
  }
  SUBCASE("object past the end is reported") {
    // Worked figure: 49 + 67 * 0.1 = 55.7, trailing edge 53.7 > 50.
    auto r = belt_advance(objs, 110.0, g, 0.1);
    CHECK(objs.empty());
    REQUIRE(r.exited.size() == 1);
    CHECK(r.exited[0].x_cm == doctest::Approx(49.0 + r.belt_speed_cmps * 0.1));
    CHECK(r.exited[0].x_cm == doctest::Approx(55.7).epsilon(1e-3));
  }
}

TEST_CASE("objects never overtake one another") {
  const BeltGeometry g;
  std::vector<ObjectInstance> objs;
  for (int i = 0; i < 5; ++i) objs.push_back(obj_at(40.0 - 10.31 * i, 7.0, i + 1));
  for (int step = 0; step < 2000; ++step) {
    belt_advance(objs, 80.0, g, 0.001);
    for (std::size_t i = 1; i < objs.size(); ++i) REQUIRE(objs[i - 1].x_cm > objs[i].x_cm);
  }
}

TEST_CASE("sensor uses a closed interval") {
  const BeltGeometry g;
  SensorState s;
  CHECK_FALSE(sensor_sample({}, g, s).blocked);
  CHECK(sensor_sample({obj_at(g.sensor_pos_cm)}, g, s).blocked);          // leading edge on it
  CHECK(sensor_sample({obj_at(g.sensor_pos_cm + 7.0)}, g, s).blocked);    // trailing edge on it
  CHECK_FALSE(sensor_sample({obj_at(g.sensor_pos_cm - 1e-9)}, g, s).blocked);
  CHECK_FALSE(sensor_sample({obj_at(g.sensor_pos_cm + 7.0 + 1e-9)}, g, s).blocked);
}

TEST_CASE("rising edge only on a clear-to-blocked transition") {
  const BeltGeometry g;
  SensorState s;
  s = sensor_sample({obj_at(20.0)}, g, s);
  CHECK(s.rising_edge());
  s = sensor_sample({obj_at(20.5)}, g, s);
  CHECK_FALSE(s.rising_edge());
}

TEST_CASE("rising edges at 390 per minute for the calibrated pitch") {
  const BeltGeometry g;
  const double pitch = 10.31;
  std::vector<ObjectInstance> objs;
  for (int i = 0; i < 60; ++i) objs.push_back(obj_at(-pitch * i, 7.0, i + 1));
  SensorState s;
  std::vector<int> edges;
  for (int t = 0; t < 8000; ++t) {
    const auto adv = belt_advance(objs, 110.0 * 67.0 / 67.04, g, 0.001);
    (void)adv;
    s = sensor_sample(objs, g, s);
    if (s.rising_edge()) edges.push_back(t);
  }
  REQUIRE(edges.size() > 10);
  const double spacing = double(edges.back() - edges.front()) / double(edges.size() - 1);
  CHECK(spacing == doctest::Approx(153.9).epsilon(0.005));
  CHECK(60000.0 / spacing == doctest::Approx(390.0).epsilon(0.005));
}

TEST_CASE("edge count equals object count") {
  const BeltGeometry g;
  std::vector<ObjectInstance> objs;
  for (int i = 0; i < 20; ++i) objs.push_back(obj_at(-9.0 * i, 7.0, i + 1));
  SensorState s;
  int edges = 0;
  while (!objs.empty()) {
    belt_advance(objs, 90.0, g, 0.001);
    s = sensor_sample(objs, g, s);
    edges += s.rising_edge();
  }
  CHECK(edges == 20);
}

TEST_CASE("illumination is linear and range checked") {
  CHECK(set_illumination(255).relative_lux == 1.0);
  CHECK(set_illumination(0).relative_lux == 0.0);
  CHECK(set_illumination(128).relative_lux == doctest::Approx(0.50196).epsilon(1e-5));
  CHECK_THROWS_AS(set_illumination(256), RangeError);
  CHECK_THROWS_AS(set_illumination(-1), RangeError);
}

TEST_CASE("geometry invariant") {
  BeltGeometry g;
  CHECK_NOTHROW(g.validate());
  g.inspect_pos_cm = 19.0;
  CHECK_THROWS_AS(g.validate(), RangeError);
  g = {};
  g.inspect_pos_cm = 50.0;
  CHECK_THROWS_AS(g.validate(), RangeError);
}

}  // TEST_SUITE
