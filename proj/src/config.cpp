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

#include "beltline/config.h"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "beltline/error.h"

namespace beltline {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

// Typed access to one JSON object with path-qualified errors. Keys that are
// never read are rejected by finish().
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "/" : path_, "expected an object");
  }

  std::string at(std::string_view key) const { return path_ + "/" + std::string(key); }

  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key) && !j_[key].is_null();
  }

  void read(const char* key, double& out) {
    if (!has(key)) return;
    if (!j_[key].is_number()) throw ConfigError(at(key), "expected a number");
    out = j_[key].get<double>();
  }
  void read(const char* key, int& out) {
    if (!has(key)) return;
    if (!j_[key].is_number_integer()) throw ConfigError(at(key), "expected an integer");
    out = j_[key].get<int>();
  }
  void read(const char* key, std::int64_t& out) {
    if (!has(key)) return;
    if (!j_[key].is_number_integer()) throw ConfigError(at(key), "expected an integer");
    out = j_[key].get<std::int64_t>();
  }
  void read(const char* key, std::uint64_t& out) {
    if (!has(key)) return;
    if (!j_[key].is_number_integer() || j_[key].get<std::int64_t>() < 0)
      throw ConfigError(at(key), "expected a nonnegative integer");
    out = j_[key].get<std::uint64_t>();
  }
  void read(const char* key, bool& out) {
    if (!has(key)) return;
    if (!j_[key].is_boolean()) throw ConfigError(at(key), "expected true or false");
    out = j_[key].get<bool>();
  }
  void read(const char* key, std::string& out) {
    if (!has(key)) return;
    if (!j_[key].is_string()) throw ConfigError(at(key), "expected a string");
    out = j_[key].get<std::string>();
  }
  template <typename T>
  void read(const char* key, std::optional<T>& out) {
    if (!has(key)) return;
    T v{};
    read(key, v);
    out = v;
  }

  const json& raw(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key())) throw ConfigError(at(item.key()), "unknown field");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string, std::less<>> seen_;
};

CaseKind read_case(Section& s, const char* key, CaseKind fallback) {
  std::string text(to_string(fallback));
  s.read(key, text);
  const auto kind = parse_case_kind(text);
  if (!kind) throw ConfigError(s.at(key), "expected \"A\", \"B\" or \"C\"");
  return *kind;
}

Tool parse_tool(const json& j, const std::string& path) {
  Section s(j, path);
  Tool t;
  s.read("id", t.id);
  std::string kind;
  s.read("kind", kind);
  const auto k = parse_tool_kind(kind);
  if (!k) throw ConfigError(s.at("kind"), "unknown tool kind '" + kind + "'");
  t.kind = *k;
  if (!s.has("roi")) throw ConfigError(s.at("roi"), "missing");
  const auto& roi = s.raw("roi");
  if (!roi.is_array() || roi.size() != 4)
    throw ConfigError(s.at("roi"), "expected [x0, y0, x1, y1]");
  for (const auto& v : roi)
    if (!v.is_number_integer()) throw ConfigError(s.at("roi"), "expected integers");
  t.roi = {roi[0].get<int>(), roi[1].get<int>(), roi[2].get<int>(), roi[3].get<int>()};
  s.read("scan_row", t.scan_row);
  if (s.has("threshold")) {
    const auto& th = s.raw("threshold");
    if (th.is_string() && th.get<std::string>() == "otsu") {
      t.threshold.reset();
    } else if (th.is_number_integer()) {
      t.threshold = th.get<int>();
    } else {
      throw ConfigError(s.at("threshold"), "expected \"otsu\" or an integer");
    }
  }
  s.read("min_area", t.min_area);
  s.read("min", t.min);
  s.read("max", t.max);
  s.finish();
  return t;
}

InspectionRecipe parse_recipe_json(const json& j, const std::string& path,
                                   std::optional<CaseKind> expect) {
  Section s(j, path);
  InspectionRecipe r;
  r.case_kind = read_case(s, "case", expect.value_or(CaseKind::A));
  if (expect && r.case_kind != *expect)
    throw ConfigError(s.at("case"), "recipe case does not match its key");
  if (!s.has("tools") || !s.raw("tools").is_array())
    throw ConfigError(s.at("tools"), "expected an array of tools");
  const auto& tools = s.raw("tools");
  for (std::size_t i = 0; i < tools.size(); ++i)
    r.tools.push_back(parse_tool(tools[i], s.at("tools") + "/" + std::to_string(i)));
  s.finish();
  try {
    r.validate();
  } catch (const RangeError& e) {
    throw ConfigError(s.at(e.field()), e.what());
  }
  return r;
}

ojson recipe_json(const InspectionRecipe& r) {
  ojson tools = ojson::array();
  for (const auto& t : r.tools) {
    ojson j{{"id", t.id},
            {"kind", to_string(t.kind)},
            {"roi", {t.roi.x0, t.roi.y0, t.roi.x1, t.roi.y1}}};
    if (t.kind == ToolKind::BarRuns || t.kind == ToolKind::Contrast)
      j["scan_row"] = t.scan_row;
    if (t.kind == ToolKind::BlobCount || t.kind == ToolKind::Circularity) {
      j["threshold"] = t.threshold ? ojson(*t.threshold) : ojson("otsu");
      j["min_area"] = t.min_area;
    }
    if (std::isfinite(t.min)) j["min"] = t.min;
    if (std::isfinite(t.max)) j["max"] = t.max;
    tools.push_back(std::move(j));
  }
  return ojson{{"case", to_string(r.case_kind)}, {"tools", std::move(tools)}};
}

template <typename Fn>
void rethrow_range(const std::string& path, Fn&& fn) {
  try {
    fn();
  } catch (const RangeError& e) {
    throw ConfigError(path + "/" + e.field(), e.what());
  }
}

}  // namespace

SimConfig default_config() {
  SimConfig cfg;
  cfg.run.object_count = 500;
  return cfg;
}

InspectionRecipe SimConfig::recipe(CaseKind kind) const {
  auto it = recipes.find(kind);
  return it != recipes.end() ? it->second : recipe_for(kind);
}

void SimConfig::validate() const {
  rethrow_range("/plant", [&] { plant.geometry.validate(); });
  if (!(plant.motor.max_rpm > 0.0)) throw ConfigError("/plant/max_rpm", "must be positive");
  if (!(plant.motor.tau_s > 0.0)) throw ConfigError("/plant/tau_s", "must be positive");
  if (!(plant.motor.pulses_per_rev > 0.0))
    throw ConfigError("/plant/pulses_per_rev", "must be positive");
  if (plant.sensor_latency_ms < 0)
    throw ConfigError("/plant/sensor_latency_ms", "must be >= 0");
  rethrow_range("/controller", [&] { controller.validate(); });
  rethrow_range("/camera", [&] { camera.validate(); });
  rethrow_range("/scenario", [&] { scenario.validate(); });
  for (const auto& [kind, r] : recipes) {
    const std::string path = "/recipes/" + std::string(to_string(kind));
    if (r.case_kind != kind) throw ConfigError(path + "/case", "does not match key");
    rethrow_range(path, [&] { r.validate(); });
  }
  if (run.duration_s.has_value() == run.object_count.has_value())
    throw ConfigError("/run", "set exactly one of duration_s and object_count");
  if (run.duration_s && !(*run.duration_s >= 0.0))
    throw ConfigError("/run/duration_s", "must be >= 0");
  if (server.telemetry_hz < 1) throw ConfigError("/server/telemetry_hz", "must be >= 1");
  if (server.bind.find(':') == std::string::npos)
    throw ConfigError("/server/bind", "expected host:port");
}

SimConfig parse_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("/", std::string("invalid JSON: ") + e.what());
  }
  SimConfig cfg;
  Section top(root, "");

  if (top.has("plant")) {
    Section s(top.raw("plant"), "/plant");
    auto& m = cfg.plant.motor;
    auto& g = cfg.plant.geometry;
    s.read("max_rpm", m.max_rpm);
    s.read("tau_s", m.tau_s);
    s.read("pulses_per_rev", m.pulses_per_rev);
    s.read("length_cm", g.length_cm);
    s.read("width_cm", g.width_cm);
    s.read("pulley_radius_cm", g.pulley_radius_cm);
    s.read("sensor_pos_cm", g.sensor_pos_cm);
    s.read("inspect_pos_cm", g.inspect_pos_cm);
    s.read("sensor_latency_ms", cfg.plant.sensor_latency_ms);
    s.finish();
  }
  if (top.has("controller")) {
    Section s(top.raw("controller"), "/controller");
    auto& c = cfg.controller;
    s.read("setpoint", c.setpoint);
    s.read("nivel_luz", c.nivel_luz);
    s.read("t_espera_ms", c.t_espera_ms);
    s.read("time_trig_us", c.time_trig_us);
    s.read("kp", c.kp);
    s.read("ki", c.ki);
    s.read("kd", c.kd);
    s.read("control_period_ms", c.control_period_ms);
    s.read("u_min", c.u_min);
    s.read("u_max", c.u_max);
    s.finish();
  }
  if (top.has("camera")) {
    Section s(top.raw("camera"), "/camera");
    auto& c = cfg.camera;
    s.read("fps", c.fps);
    s.read("frame_phase_us", c.frame_phase_us);
    s.read("inspection_ms", c.inspection_ms);
    s.read("min_trigger_us", c.min_trigger_us);
    s.read("noise_sigma", c.noise_sigma);
    s.read("motion_blur", c.motion_blur);
    s.read("exposure_ms", c.exposure_ms);
    s.read("dump_dir", c.dump_dir);
    s.finish();
  }
  if (top.has("scenario")) {
    Section s(top.raw("scenario"), "/scenario");
    auto& sc = cfg.scenario;
    sc.case_kind = read_case(s, "case", sc.case_kind);
    sc.defect_model = default_defect_model(sc.case_kind);
    s.read("defect_fraction", sc.defect_fraction);
    s.read("pitch_cm", sc.pitch_cm);
    s.read("object_length_cm", sc.object_length_cm);
    s.read("stratified", sc.stratified);
    if (s.has("defect_model")) {
      Section d(s.raw("defect_model"), "/scenario/defect_model");
      auto& m = sc.defect_model;
      d.read("severity_min", m.severity_min);
      d.read("severity_max", m.severity_max);
      d.read("residue_probability", m.residue_probability);
      d.read("residue_min", m.residue_min);
      d.read("residue_max", m.residue_max);
      d.read("stray_probability", m.stray_probability);
      d.read("stray_min", m.stray_min);
      d.read("stray_max", m.stray_max);
      d.finish();
    }
    s.finish();
  }
  if (top.has("recipes")) {
    Section s(top.raw("recipes"), "/recipes");
    for (const char* key : {"A", "B", "C"}) {
      if (!s.has(key)) continue;
      const auto kind = *parse_case_kind(key);
      cfg.recipes[kind] = parse_recipe_json(s.raw(key), s.at(key), kind);
    }
    s.finish();
  }
  if (top.has("run")) {
    Section s(top.raw("run"), "/run");
    s.read("duration_s", cfg.run.duration_s);
    s.read("object_count", cfg.run.object_count);
    s.read("seed", cfg.run.seed);
    s.read("headless", cfg.run.headless);
    s.read("realtime", cfg.run.realtime);
    s.read("log_path", cfg.run.log_path);
    s.finish();
  }
  if (!cfg.run.duration_s && !cfg.run.object_count) cfg.run.object_count = 500;
  if (top.has("server")) {
    Section s(top.raw("server"), "/server");
    s.read("bind", cfg.server.bind);
    s.read("telemetry_hz", cfg.server.telemetry_hz);
    s.finish();
  }
  top.finish();

  cfg.scenario.seed = cfg.run.seed;
  cfg.validate();
  return cfg;
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("/", "cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const SimConfig& cfg) {
  const auto& m = cfg.plant.motor;
  const auto& g = cfg.plant.geometry;
  const auto& c = cfg.controller;
  const auto& cam = cfg.camera;
  const auto& sc = cfg.scenario;
  const auto& dm = sc.defect_model;

  ojson run;
  if (cfg.run.duration_s) run["duration_s"] = *cfg.run.duration_s;
  if (cfg.run.object_count) run["object_count"] = *cfg.run.object_count;
  run["seed"] = cfg.run.seed;
  run["headless"] = cfg.run.headless;
  run["realtime"] = cfg.run.realtime;
  run["log_path"] = cfg.run.log_path;

  ojson recipes = ojson::object();
  for (const auto& [kind, r] : cfg.recipes) recipes[std::string(to_string(kind))] = recipe_json(r);

  ojson root{
      {"plant",
       {{"max_rpm", m.max_rpm},
        {"tau_s", m.tau_s},
        {"pulses_per_rev", m.pulses_per_rev},
        {"length_cm", g.length_cm},
        {"width_cm", g.width_cm},
        {"pulley_radius_cm", g.pulley_radius_cm},
        {"sensor_pos_cm", g.sensor_pos_cm},
        {"inspect_pos_cm", g.inspect_pos_cm},
        {"sensor_latency_ms", cfg.plant.sensor_latency_ms}}},
      {"controller",
       {{"setpoint", c.setpoint},
        {"nivel_luz", c.nivel_luz},
        {"t_espera_ms", c.t_espera_ms},
        {"time_trig_us", c.time_trig_us},
        {"kp", c.kp},
        {"ki", c.ki},
        {"kd", c.kd},
        {"control_period_ms", c.control_period_ms},
        {"u_min", c.u_min},
        {"u_max", c.u_max}}},
      {"camera",
       {{"fps", cam.fps},
        {"frame_phase_us", cam.frame_phase_us},
        {"inspection_ms", cam.inspection_ms},
        {"min_trigger_us", cam.min_trigger_us},
        {"noise_sigma", cam.noise_sigma},
        {"motion_blur", cam.motion_blur},
        {"exposure_ms", cam.exposure_ms},
        {"dump_dir", cam.dump_dir}}},
      {"scenario",
       {{"case", to_string(sc.case_kind)},
        {"defect_fraction", sc.defect_fraction},
        {"pitch_cm", sc.pitch_cm},
        {"object_length_cm", sc.object_length_cm},
        {"stratified", sc.stratified},
        {"defect_model",
         {{"severity_min", dm.severity_min},
          {"severity_max", dm.severity_max},
          {"residue_probability", dm.residue_probability},
          {"residue_min", dm.residue_min},
          {"residue_max", dm.residue_max},
          {"stray_probability", dm.stray_probability},
          {"stray_min", dm.stray_min},
          {"stray_max", dm.stray_max}}}}},
      {"recipes", std::move(recipes)},
      {"run", std::move(run)},
      {"server", {{"bind", cfg.server.bind}, {"telemetry_hz", cfg.server.telemetry_hz}}}};
  return root.dump(2);
}

std::string serialize_recipe(const InspectionRecipe& recipe) {
  return recipe_json(recipe).dump(2);
}

InspectionRecipe parse_recipe(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("/", std::string("invalid JSON: ") + e.what());
  }
  return parse_recipe_json(j, "", std::nullopt);
}

}  // namespace beltline
