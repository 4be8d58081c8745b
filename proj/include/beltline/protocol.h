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
#include <string>
#include <string_view>

#include "beltline/controller.h"
#include "beltline/object.h"
#include "beltline/simulation.h"

namespace beltline {

inline constexpr int kProtoVersion = 1;

enum class CommandKind { Start, Stop, SetParams, SetScenario, SnapshotFrame };

std::string_view to_string(CommandKind kind);

struct Command {
  /// The client's id, echoed verbatim in the reply (any JSON value).
  std::string id_json = "null";
  CommandKind kind = CommandKind::Start;
  ParamsPatch patch;                   // set_params
  std::optional<CaseKind> case_kind;   // set_scenario
};

/// Parses a {id, cmd, args} envelope. Throws ProtocolError.
Command parse_command(std::string_view text);

/// Best-effort recovery of the id from a message that failed to parse, so the
/// error reply can still be matched.
std::string command_id(std::string_view text);

struct Reply {
  std::string id_json = "null";
  bool ok = true;
  std::string error_code;
  std::string error_field;
  std::string error_message;
  std::string data_json;  // empty = no data member
};

std::string serialize_reply(const Reply& reply);

/// Applies a parsed command to the loop-owned simulation. Call only from the
/// thread that steps it.
Reply execute(Simulation& sim, const Command& cmd);

std::string telemetry_json(const TelemetryFrame& t);

/// GET /config body: the running configuration plus the accepted parameter
/// ranges, so clients validate with the same limits.
std::string config_json(const SimConfig& cfg);

}  // namespace beltline
