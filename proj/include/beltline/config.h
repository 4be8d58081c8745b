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
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "beltline/camera.h"
#include "beltline/controller.h"
#include "beltline/plant.h"
#include "beltline/scenarios.h"

namespace beltline {

struct PlantConfig {
  MotorConstants motor;
  BeltGeometry geometry;
  int sensor_latency_ms = 0;

  bool operator==(const PlantConfig&) const = default;
};

struct RunConfig {
  std::optional<double> duration_s;
  std::optional<std::uint64_t> object_count;
  std::uint64_t seed = 1;
  bool headless = true;
  /// Pace the loop to wall-clock time (interactive mode).
  bool realtime = false;
  std::string log_path;

  bool operator==(const RunConfig&) const = default;
};

struct ServerConfig {
  std::string bind = "127.0.0.1:8080";
  int telemetry_hz = 10;

  bool operator==(const ServerConfig&) const = default;
};

struct SimConfig {
  PlantConfig plant;
  ControllerParams controller;
  CameraConfig camera;
  ScenarioConfig scenario;
  /// Recipe overrides by case; cases not listed use recipe_for().
  std::map<CaseKind, InspectionRecipe> recipes;
  RunConfig run;
  ServerConfig server;

  /// Checks every module invariant; throws ConfigError with a field path.
  void validate() const;
  InspectionRecipe recipe(CaseKind kind) const;

  bool operator==(const SimConfig&) const = default;
};

/// Defaults everywhere; run.object_count = 500.
SimConfig default_config();

SimConfig parse_config(std::string_view json_text);
SimConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const SimConfig& cfg);

std::string serialize_recipe(const InspectionRecipe& recipe);
InspectionRecipe parse_recipe(std::string_view json_text);

}  // namespace beltline
