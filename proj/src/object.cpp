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

#include "beltline/object.h"

namespace beltline {

std::string_view to_string(CaseKind kind) {
  switch (kind) {
    case CaseKind::A: return "A";
    case CaseKind::B: return "B";
    case CaseKind::C: return "C";
  }
  return "?";
}

std::string_view to_string(Truth truth) {
  return truth == Truth::Good ? "good" : "defective";
}

std::optional<CaseKind> parse_case_kind(std::string_view text) {
  if (text == "A" || text == "a") return CaseKind::A;
  if (text == "B" || text == "b") return CaseKind::B;
  if (text == "C" || text == "c") return CaseKind::C;
  return std::nullopt;
}

std::optional<Truth> parse_truth(std::string_view text) {
  if (text == "good") return Truth::Good;
  if (text == "defective") return Truth::Defective;
  return std::nullopt;
}

CaseKind case_of(const Appearance& appearance) {
  return static_cast<CaseKind>(appearance.index());
}

}  // namespace beltline
