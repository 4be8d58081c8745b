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

#include "beltline/camera.h"

#include <cmath>
#include <exception>
#include <string>

#include "beltline/error.h"

namespace beltline {

std::string_view to_string(ToolKind kind) {
  switch (kind) {
    case ToolKind::IntensityMean: return "intensity_mean";
    case ToolKind::BlobCount: return "blob_count";
    case ToolKind::Circularity: return "circularity";
    case ToolKind::BarRuns: return "bar_runs";
    case ToolKind::Contrast: return "contrast";
  }
  return "?";
}

std::optional<ToolKind> parse_tool_kind(std::string_view text) {
  for (auto k : {ToolKind::IntensityMean, ToolKind::BlobCount,
                 ToolKind::Circularity, ToolKind::BarRuns, ToolKind::Contrast})
    if (to_string(k) == text) return k;
  return std::nullopt;
}

void InspectionRecipe::validate(int width, int height) const {
  if (tools.empty()) throw RangeError("tools", "recipe has no tools");
  for (const auto& t : tools) {
    if (!t.roi.inside(width, height))
      throw RangeError("roi", "tool '" + t.id + "': ROI outside frame bounds");
    if (t.kind == ToolKind::BarRuns &&
        (t.scan_row < t.roi.y0 || t.scan_row >= t.roi.y1))
      throw RangeError("scan_row", "tool '" + t.id + "': scan row outside ROI");
    if (t.threshold && (*t.threshold < 0 || *t.threshold > 255))
      throw RangeError("threshold", "tool '" + t.id + "': threshold outside 0..255");
  }
}

namespace {

std::vector<Blob> roi_blobs(const Frame& frame, const Tool& tool) {
  const int t = tool.threshold ? *tool.threshold
                               : otsu_threshold(histogram(frame, tool.roi));
  auto blobs = connected_components(binarize(frame, tool.roi, t));
  std::erase_if(blobs, [&](const Blob& b) { return b.area < tool.min_area; });
  return blobs;
}

double measure(const Frame& frame, const Tool& tool) {
  switch (tool.kind) {
    case ToolKind::IntensityMean: {
      const Histogram h = histogram(frame, tool.roi);
      double sum = 0;
      for (int v = 0; v < 256; ++v) sum += double(h.bins[v]) * v;
      return sum / double(h.total());
    }
    case ToolKind::BlobCount:
      return static_cast<double>(roi_blobs(frame, tool).size());
    case ToolKind::Circularity: {
      double worst = 0.0;
      for (const auto& b : roi_blobs(frame, tool)) worst = std::max(worst, circularity(b));
      return worst;
    }
    case ToolKind::BarRuns:
      return bar_runs(frame, tool.roi, tool.scan_row).dark_runs;
    case ToolKind::Contrast: {
      const int row = tool.scan_row >= 0 ? tool.scan_row : tool.roi.y0;
      return bar_runs(frame, tool.roi, row).min_contrast;
    }
  }
  return 0.0;
}

}  // namespace

ToolResult run_tool(const Frame& frame, const Tool& tool) {
  ToolResult r;
  r.id = tool.id;
  if (!tool.roi.inside(frame.width(), frame.height())) {
    r.diagnostic = "ROI empty or outside frame";
    return r;
  }
  try {
    r.value = measure(frame, tool);
    r.pass = r.value >= tool.min && r.value <= tool.max;
  } catch (const std::exception& e) {
    r.value = 0.0;
    r.pass = false;
    r.diagnostic = e.what();
  }
  return r;
}

Verdict run_recipe(const Frame& frame, const InspectionRecipe& recipe) {
  Verdict v;
  bool all = !recipe.tools.empty();
  for (const auto& tool : recipe.tools) {
    v.tool_results.push_back(run_tool(frame, tool));
    all = all && v.tool_results.back().pass;
  }
  v.outcome = all ? Outcome::Pass : Outcome::Fail;
  return v;
}

void CameraConfig::validate() const {
  if (fps <= 0) throw RangeError("fps", "fps must be positive");
  if (inspection_ms < 0.0) throw RangeError("inspection_ms", "must be >= 0");
  if (min_trigger_us <= 0) throw RangeError("min_trigger_us", "must be > 0");
  if (noise_sigma < 0.0) throw RangeError("noise_sigma", "must be >= 0");
  if (exposure_ms < 0.0) throw RangeError("exposure_ms", "must be >= 0");
}

std::int64_t next_frame_boundary_us(std::int64_t t_us, std::int64_t phase_us,
                                    int fps) {
  // Boundary k sits at phase + k*1e6/fps; work in units of 1/fps us to stay
  // exact.
  const std::int64_t scaled = (t_us - phase_us) * fps;
  std::int64_t k = scaled >= 0 ? (scaled + 999'999) / 1'000'000
                               : -((-scaled) / 1'000'000);
  auto at = [&](std::int64_t kk) {
    return phase_us + (kk * 1'000'000 + fps / 2) / fps;
  };
  while (at(k) < t_us) ++k;
  while (at(k - 1) >= t_us) --k;
  return at(k);
}

Camera::Camera(CameraConfig cfg) : cfg_(cfg) { cfg_.validate(); }

std::int64_t Camera::inspection_us() const {
  return std::llround(cfg_.inspection_ms * 1000.0);
}

std::optional<ScheduledCapture> Camera::trigger(const TriggerPulse& pulse) {
  ++pulses_;
  const auto start_us = std::llround(pulse.start_ms * 1000.0);
  if (pulse.width_us < cfg_.min_trigger_us || pending_ || start_us < busy_until_us_) {
    ++missed_;
    return std::nullopt;
  }
  ScheduledCapture cap{start_us, next_frame_boundary_us(start_us, cfg_.frame_phase_us, cfg_.fps),
                       pulse.object_id};
  pending_ = cap;
  return cap;
}

std::optional<ScheduledCapture> Camera::due(std::int64_t now_us) {
  if (!pending_ || pending_->capture_us > now_us) return std::nullopt;
  auto cap = *pending_;
  pending_.reset();
  ++captures_;
  begin_inspection(cap.capture_us);
  return cap;
}

void Camera::begin_inspection(std::int64_t capture_us) {
  busy_until_us_ = capture_us + inspection_us();
}

}  // namespace beltline
