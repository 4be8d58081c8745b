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
#include <filesystem>
#include <fstream>

#include "doctest.h"

#include "beltline/config.h"
#include "beltline/error.h"

using namespace beltline;

namespace {

std::string error_path(std::string_view json) {
  try {
    parse_config(json);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "(accepted)";
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("empty sections take the documented defaults") {
  const auto cfg = parse_config(R"({"controller": {}})");
  CHECK(cfg.controller.setpoint == 200.0);
  CHECK(cfg.controller.nivel_luz == 255);
  CHECK(cfg.controller.t_espera_ms == 6000);
  CHECK(cfg.controller.time_trig_us == 2000);
  CHECK(cfg.server.telemetry_hz == 10);
  CHECK(cfg.run.object_count == 500u);
  CHECK_FALSE(cfg.run.duration_s);
  CHECK(cfg == parse_config("{}"));
  CHECK(cfg == default_config());
}

TEST_CASE("invariant violations are reported with a field path") {
  CHECK(error_path(R"({"scenario": {"pitch_cm": 5}})") == "/scenario/pitch_cm");
  CHECK(error_path(R"({"controller": {"nivel_luz": 300}})") == "/controller/nivel_luz");
  CHECK(error_path(R"({"plant": {"inspect_pos_cm": 60}})").rfind("/plant/", 0) == 0);
  CHECK(error_path(R"({"run": {"duration_s": 5, "object_count": 5}})") == "/run");
  CHECK(error_path(R"({"server": {"telemetry_hz": 0}})") == "/server/telemetry_hz");
  CHECK(error_path(R"({"scenario": {"defect_model": {"severity_min": 2}}})") ==
        "/scenario/defect_model/severity_min");
}

TEST_CASE("schema violations") {
  CHECK(error_path(R"({"controller": {"kp": "fast"}})") == "/controller/kp");
  CHECK(error_path(R"({"controller": {"nivel_luz": 12.5}})") == "/controller/nivel_luz");
  CHECK(error_path(R"({"controler": {}})") == "/controler");
  CHECK(error_path(R"({"camera": {"fps": 60, "zoom": 2}})") == "/camera/zoom");
  CHECK(error_path(R"({"scenario": {"case": "D"}})") == "/scenario/case");
  CHECK(error_path(R"({"run": {"seed": -1}})") == "/run/seed");
  CHECK(error_path("[1, 2]") == "/");
  CHECK(error_path("{not json") == "/");
}

TEST_CASE("duration replaces the default object count") {
  const auto cfg = parse_config(R"({"run": {"duration_s": 0}})");
  CHECK(cfg.run.duration_s == 0.0);
  CHECK_FALSE(cfg.run.object_count);
}

TEST_CASE("scenario case picks its defect model and the run seed") {
  const auto cfg = parse_config(R"({"scenario": {"case": "B"}, "run": {"seed": 77}})");
  CHECK(cfg.scenario.case_kind == CaseKind::B);
  CHECK(cfg.scenario.defect_model == default_defect_model(CaseKind::B));
  CHECK(cfg.scenario.seed == 77);
}

TEST_CASE("recipes") {
  const auto cfg = parse_config(R"({"recipes": {"C": {"case": "C", "tools": [
      {"id": "heads", "kind": "blob_count", "roi": [100, 100, 500, 400],
       "threshold": "otsu", "min_area": 400, "min": 2, "max": 2},
      {"id": "shape", "kind": "circularity", "roi": [100, 100, 500, 400],
       "threshold": 120, "max": 0.93}]}}})");
  const auto r = cfg.recipe(CaseKind::C);
  REQUIRE(r.tools.size() == 2);
  CHECK_FALSE(r.tools[0].threshold);
  CHECK(r.tools[1].threshold == 120);
  CHECK(r.tools[1].max == 0.93);
  CHECK(std::isinf(r.tools[1].min));
  CHECK(cfg.recipe(CaseKind::A) == recipe_for(CaseKind::A));

  CHECK(error_path(R"({"recipes": {"A": {"case": "B", "tools": []}}})") == "/recipes/A/case");
  CHECK(error_path(R"({"recipes": {"A": {"tools": [{"id": "x", "kind": "ocr", "roi": [0,0,1,1]}]}}})") ==
        "/recipes/A/tools/0/kind");
  CHECK(error_path(R"({"recipes": {"A": {"tools": [{"id": "x", "kind": "blob_count", "roi": [0,0,700,1]}]}}})") ==
        "/recipes/A/roi");
}

TEST_CASE("recipe JSON round trip") {
  for (auto k : {CaseKind::A, CaseKind::B, CaseKind::C}) {
    const auto r = recipe_for(k);
    CHECK(parse_recipe(serialize_recipe(r)) == r);
  }
}

TEST_CASE("serialize then parse gives an equal config") {
  auto cfg = default_config();
  cfg.controller.kp = 0.61;
  cfg.controller.nivel_luz = 180;
  cfg.camera.frame_phase_us = 1234;
  cfg.scenario.case_kind = CaseKind::C;
  cfg.scenario.defect_model = default_defect_model(CaseKind::C);
  cfg.scenario.pitch_cm = 12.5;
  cfg.run.seed = 9;
  cfg.scenario.seed = 9;
  cfg.run.object_count.reset();
  cfg.run.duration_s = 42.5;
  cfg.recipes[CaseKind::B] = recipe_for(CaseKind::B);
  cfg.recipes[CaseKind::B].tools[0].threshold = 150;
  const auto text = serialize_config(cfg);
  CHECK(parse_config(text) == cfg);
  CHECK(serialize_config(parse_config(text)) == text);
}

TEST_CASE("shipped config files load") {
  const std::filesystem::path dir = BELTLINE_CONFIG_DIR;
  int seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    const auto cfg = load_config(entry.path());
    CHECK(parse_config(serialize_config(cfg)) == cfg);
    ++seen;
  }
  CHECK(seen >= 4);
  CHECK_THROWS_AS(load_config(dir / "missing.json"), ConfigError);
}

}  // TEST_SUITE
