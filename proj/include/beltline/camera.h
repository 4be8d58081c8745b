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
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "beltline/controller.h"
#include "beltline/object.h"
#include "beltline/plant.h"
#include "beltline/vision.h"

namespace beltline {

inline constexpr double kPxPerCm = 50.0;
inline constexpr int kBackgroundLevel = 30;

struct RenderOptions {
  double noise_sigma = 4.0;
  /// Horizontal displacement of the object from the field-of-view center.
  double offset_px = 0.0;
  /// Horizontal motion-blur length; 0 disables.
  double blur_px = 0.0;
};

/// Synthetic view of one part: scene drawn on background level 30, feature
/// contrast scaled by illumination, seeded Gaussian noise, clamped to 8 bits.
Frame render(const ObjectInstance& object, const Illumination& illum,
             std::uint64_t noise_seed, const RenderOptions& opts = {});

/// Empty inspection zone (belt only).
Frame render_empty(const Illumination& illum, std::uint64_t noise_seed,
                   const RenderOptions& opts = {});

enum class ToolKind { IntensityMean, BlobCount, Circularity, BarRuns, Contrast };

std::string_view to_string(ToolKind kind);
std::optional<ToolKind> parse_tool_kind(std::string_view text);

/// One tool invocation and its acceptance window [min, max] on the
/// measured value.
struct Tool {
  std::string id;
  ToolKind kind = ToolKind::IntensityMean;
  Roi roi;
  int scan_row = -1;             // BarRuns only
  std::optional<int> threshold;  // fixed gray level; unset = Otsu in ROI
  int min_area = 1;              // blobs smaller than this are ignored
  double min = -std::numeric_limits<double>::infinity();
  double max = std::numeric_limits<double>::infinity();

  bool operator==(const Tool&) const = default;
};

struct InspectionRecipe {
  CaseKind case_kind = CaseKind::A;
  std::vector<Tool> tools;

  /// Throws RangeError for an empty tool list or an ROI outside the frame.
  void validate(int width = kFrameWidth, int height = kFrameHeight) const;

  bool operator==(const InspectionRecipe&) const = default;
};

struct ToolResult {
  std::string id;
  double value = 0.0;
  bool pass = false;
  std::string diagnostic;

  bool operator==(const ToolResult&) const = default;
};

struct Verdict {
  Outcome outcome = Outcome::Fail;
  std::vector<ToolResult> tool_results;
};

/// Runs every tool in order. A tool that cannot run reports pass=false with
/// a diagnostic; the verdict is Pass only when every tool passes.
Verdict run_recipe(const Frame& frame, const InspectionRecipe& recipe);

ToolResult run_tool(const Frame& frame, const Tool& tool);

struct CameraConfig {
  int fps = 60;
  std::int64_t frame_phase_us = 0;
  double inspection_ms = 5.0;
  int min_trigger_us = 1000;
  double noise_sigma = 4.0;
  bool motion_blur = false;
  double exposure_ms = 1.0;  // blur length = belt speed * exposure
  std::string dump_dir;      // write frame_<id>.pgm here when set

  void validate() const;

  bool operator==(const CameraConfig&) const = default;
};

/// First frame-clock boundary at or after t_us. Boundaries sit at
/// phase + k * 1e6 / fps microseconds, rounded to the nearest microsecond.
std::int64_t next_frame_boundary_us(std::int64_t t_us, std::int64_t phase_us,
                                    int fps);

struct CaptureEvent {
  double trigger_ms = 0.0;
  double capture_ms = 0.0;
  std::uint64_t object_id = 0;
  Frame frame;
};

struct ScheduledCapture {
  std::int64_t trigger_us = 0;
  std::int64_t capture_us = 0;
  std::uint64_t object_id = 0;
};

/// Trigger input and frame clock of the smart camera. One pulse yields at
/// most one capture; a pulse that arrives while a capture or inspection is
/// still in progress, or is narrower than min_trigger_us, is dropped and
/// counted in missed_triggers().
class Camera {
 public:
  explicit Camera(CameraConfig cfg = {});

  const CameraConfig& config() const { return cfg_; }

  /// Returns the scheduled capture, or nullopt if the pulse was dropped.
  std::optional<ScheduledCapture> trigger(const TriggerPulse& pulse);

  /// Pops the pending capture once its frame boundary has been reached.
  std::optional<ScheduledCapture> due(std::int64_t now_us);

  /// Marks the camera busy until the verdict for a capture is out.
  void begin_inspection(std::int64_t capture_us);

  std::int64_t inspection_us() const;
  std::uint64_t pulses() const { return pulses_; }
  std::uint64_t captures() const { return captures_; }
  std::uint64_t missed_triggers() const { return missed_; }

 private:
  CameraConfig cfg_;
  std::optional<ScheduledCapture> pending_;
  std::int64_t busy_until_us_ = std::numeric_limits<std::int64_t>::min();
  std::uint64_t pulses_ = 0;
  std::uint64_t captures_ = 0;
  std::uint64_t missed_ = 0;
};

}  // namespace beltline
