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

#include "beltline/camera.h"
#include "beltline/object.h"

namespace beltline {

/// Per-case defect statistics. Severity is drawn uniformly from
/// [severity_min, severity_max]; case B ignores it and instead uses the
/// flux-residue model.
struct DefectModel {
  double severity_min = 0.0;
  double severity_max = 1.0;
  /// Case B: chance that an empty site keeps flux residue, and the residue
  /// level range in gray levels above the board.
  double residue_probability = 0.0;
  double residue_min = 0.0;
  double residue_max = 0.0;
  /// Case B: chance of a stray flux spot on a good board, and its level.
  double stray_probability = 0.0;
  double stray_min = 0.0;
  double stray_max = 0.0;

  bool operator==(const DefectModel&) const = default;
};

/// Shipped calibration for each case.
DefectModel default_defect_model(CaseKind kind);

struct ScenarioConfig {
  CaseKind case_kind = CaseKind::A;
  double defect_fraction = 0.5;
  double pitch_cm = 10.31;
  double object_length_cm = 7.0;
  bool stratified = false;
  DefectModel defect_model = default_defect_model(CaseKind::A);
  std::uint64_t seed = 1;

  /// Throws RangeError unless pitch > object_length and the fraction and
  /// model parameters are in range.
  void validate() const;

  bool operator==(const ScenarioConfig&) const = default;
};

/// Applies a defect of the given severity (0, 1] to a good appearance.
/// `variant` picks the defect site and mode deterministically.
Appearance defect_inject(CaseKind kind, double severity,
                         const Appearance& base, std::uint64_t variant,
                         const DefectModel& model = {});

/// Nominal good part for the case, with nuisance parameters (e.g. head
/// rotation) drawn from `variant`.
Appearance good_appearance(CaseKind kind, std::uint64_t variant,
                           const DefectModel& model = {});

/// Endless, seeded object source. Object i depends only on (seed, id), so
/// any prefix of the stream is stable. With `stratified`, truth labels come
/// from a seeded permutation holding exactly round(count * fraction)
/// defectives; otherwise each is an independent Bernoulli draw.
class ObjectStream {
 public:
  explicit ObjectStream(ScenarioConfig cfg, std::uint64_t count = 0,
                        std::uint64_t first_id = 1);

  ObjectInstance next();
  std::uint64_t produced() const { return produced_; }
  const ScenarioConfig& config() const { return cfg_; }

 private:
  Truth truth_for(std::uint64_t index);

  ScenarioConfig cfg_;
  std::uint64_t count_;
  std::uint64_t first_id_;
  std::uint64_t produced_ = 0;
  std::vector<std::uint8_t> stratified_truth_;
};

/// `count` objects at uniform pitch; the first leading edge sits at x = 0
/// and each following object trails by one pitch.
std::vector<ObjectInstance> spawn_stream(const ScenarioConfig& cfg,
                                         std::uint64_t count);

/// Shipped calibrated recipe for the case.
InspectionRecipe recipe_for(CaseKind kind);

/// Deterministic 64-bit mixing (SplitMix64 finalizer).
std::uint64_t mix64(std::uint64_t x);

}  // namespace beltline
