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
#include <optional>
#include <string_view>
#include <variant>

namespace beltline {

enum class CaseKind { A, B, C };
enum class Truth { Good, Defective };

std::string_view to_string(CaseKind kind);
std::string_view to_string(Truth truth);
std::optional<CaseKind> parse_case_kind(std::string_view text);
std::optional<Truth> parse_truth(std::string_view text);

// Render parameters for each case. A default-constructed value is the
// nominal good part.

/// Case A: serigraphy-printed barcode on a container label.
struct BarcodeAppearance {
  int bar_count = 12;
  int merge_at = -1;        // gap between bar merge_at and merge_at+1
  double merge_fill = 0.0;  // 0 = clean gap, 1 = fully inked
  int fade_at = -1;
  double fade = 0.0;        // 0 = full ink, 1 = bar missing
  double ink_lift = 0.0;    // uniform contrast loss, 0..1
};

/// Case B: PCB with a single resistor at the inspected site.
struct BoardAppearance {
  bool resistor_present = true;
  /// Flux residue left at an empty site, in gray levels above the board
  /// (0 = none).
  double site_residue = 0.0;
  /// Stray flux spot beside the site, same units.
  double stray_residue = 0.0;
};

/// Case C: fixture holding two screws that must both have hexagonal heads.
struct ScrewAppearance {
  double rotation_rad[2] = {0.0, 0.0};
  int round_head = -1;    // index of the head that is round, -1 for none
  double rounding = 0.0;  // corner rounding as a fraction of the inradius
};

using Appearance =
    std::variant<BarcodeAppearance, BoardAppearance, ScrewAppearance>;

CaseKind case_of(const Appearance& appearance);

/// A part riding the belt. `x_cm` is the leading-edge position measured
/// from the belt start.
struct ObjectInstance {
  std::uint64_t id = 0;
  CaseKind case_kind = CaseKind::A;
  Truth truth = Truth::Good;
  double severity = 0.0;  // 0 for good parts
  double x_cm = 0.0;
  double length_cm = 7.0;
  Appearance appearance = BarcodeAppearance{};

  double trailing_cm() const { return x_cm - length_cm; }
  double center_cm() const { return x_cm - 0.5 * length_cm; }
};

}  // namespace beltline
