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

#include "beltline/protocol.h"

#include <limits>
#include <set>

#include "json.hpp"

#include "beltline/error.h"

namespace beltline {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

ojson optional_pct(const std::optional<double>& p) { return p ? ojson(*p) : ojson(nullptr); }

ojson counts_json(const ConfusionCounts& c) {
  return {{"vp", c.vp}, {"fp", c.fp}, {"vn", c.vn}, {"fn", c.fn}};
}

ojson summary_obj(const RunSummary& s) {
  return {{"inspected", s.inspected},
          {"elapsed_s", s.elapsed_s},
          {"counts", counts_json(s.counts)},
          {"sensitivity_pct", optional_pct(s.sensitivity_pct)},
          {"specificity_pct", optional_pct(s.specificity_pct)},
          {"throughput_per_min", s.throughput_per_min},
          {"missed_triggers", s.missed_triggers}};
}

template <typename T>
void patch_field(const json& args, const char* key, std::optional<T>& out) {
  if (!args.contains(key)) return;
  const auto& v = args[key];
  if constexpr (std::is_same_v<T, int>) {
    if (!v.is_number_integer()) throw ProtocolError("bad_args", std::string(key) + " must be an integer", key);
    const auto wide = v.get<std::int64_t>();
    // Out-of-int values are range problems, not type problems.
    if (wide < std::numeric_limits<int>::min() || wide > std::numeric_limits<int>::max())
      throw ProtocolError("range", std::string(key) + " out of range", key);
    out = int(wide);
  } else {
    if (!v.is_number()) throw ProtocolError("bad_args", std::string(key) + " must be a number", key);
    out = v.get<double>();
  }
}

ParamsPatch parse_patch(const json& args) {
  static const std::set<std::string> known = {
      "setpoint", "nivel_luz", "t_espera_ms", "time_trig_us", "kp",
      "ki",       "kd",        "control_period_ms", "u_min",  "u_max"};
  if (!args.is_object()) throw ProtocolError("bad_args", "set_params expects an object");
  for (const auto& item : args.items())
    if (!known.count(item.key()))
      throw ProtocolError("bad_args", "unknown parameter '" + item.key() + "'", item.key());
  ParamsPatch p;
  patch_field(args, "setpoint", p.setpoint);
  patch_field(args, "nivel_luz", p.nivel_luz);
  patch_field(args, "t_espera_ms", p.t_espera_ms);
  patch_field(args, "time_trig_us", p.time_trig_us);
  patch_field(args, "kp", p.kp);
  patch_field(args, "ki", p.ki);
  patch_field(args, "kd", p.kd);
  patch_field(args, "control_period_ms", p.control_period_ms);
  patch_field(args, "u_min", p.u_min);
  patch_field(args, "u_max", p.u_max);
  return p;
}

}  // namespace

std::string_view to_string(CommandKind kind) {
  switch (kind) {
    case CommandKind::Start: return "start";
    case CommandKind::Stop: return "stop";
    case CommandKind::SetParams: return "set_params";
    case CommandKind::SetScenario: return "set_scenario";
    case CommandKind::SnapshotFrame: return "snapshot_frame";
  }
  return "?";
}

std::string command_id(std::string_view text) {
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("id")) return "null";
  return j["id"].dump();
}

Command parse_command(std::string_view text) {
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ProtocolError("parse", "message is not valid JSON");
  if (!j.is_object()) throw ProtocolError("parse", "message must be a JSON object");
  Command c;
  if (j.contains("id")) c.id_json = j["id"].dump();
  if (!j.contains("cmd") || !j["cmd"].is_string())
    throw ProtocolError("parse", "missing string member 'cmd'", "cmd");
  const std::string name = j["cmd"].get<std::string>();
  const json args = j.contains("args") ? j["args"] : json::object();
  if (name == "start") {
    c.kind = CommandKind::Start;
  } else if (name == "stop") {
    c.kind = CommandKind::Stop;
  } else if (name == "snapshot_frame") {
    c.kind = CommandKind::SnapshotFrame;
  } else if (name == "set_params") {
    c.kind = CommandKind::SetParams;
    c.patch = parse_patch(args);
  } else if (name == "set_scenario") {
    c.kind = CommandKind::SetScenario;
    if (!args.is_object() || !args.contains("case") || !args["case"].is_string())
      throw ProtocolError("bad_args", "set_scenario expects {\"case\": \"A\"|\"B\"|\"C\"}", "case");
    c.case_kind = parse_case_kind(args["case"].get<std::string>());
    if (!c.case_kind) throw ProtocolError("range", "case must be A, B or C", "case");
  } else {
    throw ProtocolError("unknown_command", "unknown command '" + name + "'", "cmd");
  }
  return c;
}

std::string serialize_reply(const Reply& r) {
  ojson j{{"proto_version", kProtoVersion}, {"id", json::parse(r.id_json)}, {"ok", r.ok}};
  if (!r.ok) {
    ojson err{{"code", r.error_code}, {"message", r.error_message}};
    if (!r.error_field.empty()) err["field"] = r.error_field;
    j["error"] = std::move(err);
  }
  if (!r.data_json.empty()) j["data"] = ojson::parse(r.data_json);
  return j.dump();
}

Reply execute(Simulation& sim, const Command& cmd) {
  Reply r;
  r.id_json = cmd.id_json;
  try {
    switch (cmd.kind) {
      case CommandKind::Start:
        sim.start();
        break;
      case CommandKind::Stop:
        sim.stop();
        r.data_json = summary_obj(sim.summary()).dump();
        break;
      case CommandKind::SetParams:
        sim.set_params(cmd.patch);
        break;
      case CommandKind::SetScenario:
        sim.set_scenario(*cmd.case_kind);
        break;
      case CommandKind::SnapshotFrame: {
        const auto& f = sim.latest_frame();
        if (!f) {
          r.data_json = ojson{{"frame", nullptr}}.dump();
        } else {
          r.data_json = ojson{{"frame",
                               {{"object_id", f->object_id},
                                {"capture_ms", f->capture_ms},
                                {"url", "/frame/latest"}}}}
                            .dump();
        }
        break;
      }
    }
  } catch (const RangeError& e) {
    r.ok = false;
    r.error_code = "range";
    r.error_field = e.field();
    r.error_message = e.what();
  }
  return r;
}

std::string telemetry_json(const TelemetryFrame& t) {
  ojson last = nullptr;
  if (t.last_verdict)
    last = {{"object_id", t.last_verdict->object_id},
            {"verdict", to_string(t.last_verdict->outcome)},
            {"truth", to_string(t.last_verdict->truth)},
            {"t_ms", t.last_verdict->t_ms}};
  ojson j{{"proto_version", kProtoVersion},
          {"type", "telemetry"},
          {"t_ms", t.t_ms},
          {"phase", to_string(t.phase)},
          {"running", t.running},
          {"terminal", t.terminal},
          {"belt_speed_cmps", t.belt_speed_cmps},
          {"pulses_per_period", t.pulses_per_period},
          {"setpoint", t.setpoint},
          {"duty", t.duty},
          {"nivel_luz", t.nivel_luz},
          {"leds", {{"green", t.green_led}, {"red", t.red_led}}},
          {"case", to_string(t.case_kind)},
          {"last_verdict", std::move(last)},
          {"counts", counts_json(t.counts)},
          {"summary", summary_obj(t.summary)},
          {"uninspected", t.uninspected},
          {"last_frame_ref", t.last_frame_ref ? ojson(*t.last_frame_ref) : ojson(nullptr)},
          {"objects_x_cm", t.object_x_cm}};
  return j.dump();
}

std::string config_json(const SimConfig& cfg) {
  const auto& motor = cfg.plant.motor;
  const double max_setpoint = motor.pulses_per_rev * motor.max_rpm / 60.0 *
                              cfg.controller.control_period_ms / 1000.0;
  ojson ranges{
      {"setpoint", {{"min", 0}, {"reachable_max", max_setpoint}}},
      {"nivel_luz", {{"min", 0}, {"max", 255}, {"integer", true}}},
      {"t_espera_ms", {{"min", 0}, {"integer", true}}},
      {"time_trig_us", {{"min", 1}, {"integer", true}}},
      {"kp", ojson::object()},
      {"ki", {{"min", 0}}},
      {"kd", ojson::object()},
      {"control_period_ms", {{"min", 1}, {"integer", true}}},
      {"u_min", {{"min", 0}, {"max", kDutyMax}}},
      {"u_max", {{"min", 0}, {"max", kDutyMax}}}};
  ojson j{{"proto_version", kProtoVersion},
          {"config", ojson::parse(serialize_config(cfg))},
          {"ranges", std::move(ranges)}};
  return j.dump();
}

}  // namespace beltline
