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

#include "beltline/scenarios.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <limits>
#include <random>
#include <string>

#include "beltline/error.h"

namespace beltline {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

// Uniform double in [0, 1) from the top 53 bits.
double unit(std::uint64_t bits) { return double(bits >> 11) * 0x1.0p-53; }

// Fraction of a defect's full visual effect reached at a given severity.
double barcode_effect(double severity) {
  return 1.0 - std::pow(1.0 - std::clamp(severity, 0.0, 1.0), 8.0);
}

}  // namespace

DefectModel default_defect_model(CaseKind kind) {
  DefectModel m;
  switch (kind) {
    case CaseKind::A:
      m.severity_min = 0.08;
      break;
    case CaseKind::B:
      // Residue at +60 sits exactly on the recipe threshold: invisible
      // without noise, percolating into a counted blob with it.
      m.residue_probability = 0.8;
      m.residue_min = 55.0;
      m.residue_max = 60.0;
      m.stray_probability = 0.01;
      m.stray_min = 55.0;
      m.stray_max = 60.0;
      break;
    case CaseKind::C:
      m.severity_min = 0.0;
      break;
  }
  return m;
}

void ScenarioConfig::validate() const {
  if (!(defect_fraction >= 0.0 && defect_fraction <= 1.0))
    throw RangeError("defect_fraction", "defect_fraction must lie in [0, 1]");
  if (!(object_length_cm > 0.0))
    throw RangeError("object_length_cm", "object length must be positive");
  if (!(pitch_cm > object_length_cm))
    throw RangeError("pitch_cm", "pitch must exceed object length");
  const auto& m = defect_model;
  if (!(m.severity_min >= 0.0 && m.severity_min <= m.severity_max &&
        m.severity_max <= 1.0))
    throw RangeError("defect_model/severity_min", "need 0 <= severity_min <= severity_max <= 1");
  for (double p : {m.residue_probability, m.stray_probability})
    if (!(p >= 0.0 && p <= 1.0))
      throw RangeError("defect_model", "probabilities must lie in [0, 1]");
  if (m.residue_min > m.residue_max || m.stray_min > m.stray_max)
    throw RangeError("defect_model/residue_min", "residue range is inverted");
}

Appearance good_appearance(CaseKind kind, std::uint64_t variant,
                           const DefectModel& model) {
  switch (kind) {
    case CaseKind::A:
      return BarcodeAppearance{};
    case CaseKind::B: {
      BoardAppearance b;
      const std::uint64_t h = mix64(variant ^ 0x5bd1e995ULL);
      if (unit(h) < model.stray_probability)
        b.stray_residue = model.stray_min +
                          unit(mix64(h)) * (model.stray_max - model.stray_min);
      return b;
    }
    case CaseKind::C: {
      ScrewAppearance s;
      constexpr double kSixth = std::numbers::pi / 3.0;
      s.rotation_rad[0] = unit(mix64(variant + 1)) * kSixth;
      s.rotation_rad[1] = unit(mix64(variant + 2)) * kSixth;
      return s;
    }
  }
  throw Error("unknown case kind");
}

Appearance defect_inject(CaseKind kind, double severity,
                         const Appearance& base, std::uint64_t variant,
                         const DefectModel& model) {
  if (!(severity > 0.0 && severity <= 1.0))
    throw RangeError("severity", "severity must lie in (0, 1]");
  if (case_of(base) != kind) throw Error("defect_inject: appearance/case mismatch");

  switch (kind) {
    case CaseKind::A: {
      auto a = std::get<BarcodeAppearance>(base);
      const double e = barcode_effect(severity);
      const int mode = static_cast<int>(variant % 3);
      const int site = static_cast<int>((variant / 3) % std::uint64_t(a.bar_count - 1));
      if (mode == 0) {
        a.merge_at = site;
        a.merge_fill = e;
      } else if (mode == 1) {
        a.fade_at = site;
        a.fade = e;
      } else {
        a.ink_lift = 0.6 * e;
      }
      return a;
    }
    case CaseKind::B: {
      auto b = std::get<BoardAppearance>(base);
      b.resistor_present = false;
      b.stray_residue = 0.0;
      const std::uint64_t h = mix64(variant ^ 0x2545f4914f6cdd1dULL);
      if (unit(h) < model.residue_probability)
        b.site_residue = model.residue_min +
                         unit(mix64(h)) * (model.residue_max - model.residue_min);
      return b;
    }
    case CaseKind::C: {
      auto c = std::get<ScrewAppearance>(base);
      c.round_head = static_cast<int>(variant % 2);
      c.rounding = std::min(1.0, 2.8 * severity);
      return c;
    }
  }
  throw Error("defect_inject: unknown case");
}

ObjectStream::ObjectStream(ScenarioConfig cfg, std::uint64_t count,
                           std::uint64_t first_id)
    : cfg_(std::move(cfg)), count_(count), first_id_(first_id) {
  cfg_.validate();
  if (cfg_.stratified && count_ > 0) {
    const auto defective = static_cast<std::uint64_t>(
        std::llround(cfg_.defect_fraction * double(count_)));
    stratified_truth_.assign(count_, 0);
    std::fill_n(stratified_truth_.begin(), defective, 1);
    std::mt19937_64 rng(mix64(cfg_.seed ^ 0x9e3779b97f4a7c15ULL));
    // Fisher-Yates with our own index draw so the order is library-independent.
    for (std::uint64_t i = count_ - 1; i > 0; --i) {
      const std::uint64_t j = rng() % (i + 1);
      std::swap(stratified_truth_[i], stratified_truth_[j]);
    }
  }
}

Truth ObjectStream::truth_for(std::uint64_t index) {
  if (index < stratified_truth_.size())
    return stratified_truth_[index] ? Truth::Defective : Truth::Good;
  const std::uint64_t h = mix64(mix64(cfg_.seed) ^ (index + first_id_));
  return unit(h) < cfg_.defect_fraction ? Truth::Defective : Truth::Good;
}

ObjectInstance ObjectStream::next() {
  const std::uint64_t index = produced_++;
  ObjectInstance o;
  o.id = first_id_ + index;
  o.case_kind = cfg_.case_kind;
  o.length_cm = cfg_.object_length_cm;
  o.x_cm = 0.0;
  o.truth = truth_for(index);

  const std::uint64_t key = mix64(cfg_.seed * 0x100000001b3ULL ^ mix64(o.id));
  const std::uint64_t variant = mix64(key + 1);
  o.appearance = good_appearance(cfg_.case_kind, variant, cfg_.defect_model);
  if (o.truth == Truth::Defective) {
    const auto& m = cfg_.defect_model;
    // (min, max]: severity 0 would be a good part.
    const double u = 1.0 - unit(mix64(key + 2));
    o.severity = std::max(m.severity_min + u * (m.severity_max - m.severity_min),
                          1e-6);
    o.appearance = defect_inject(cfg_.case_kind, o.severity, o.appearance,
                                 mix64(key + 3), m);
  }
  return o;
}

std::vector<ObjectInstance> spawn_stream(const ScenarioConfig& cfg,
                                         std::uint64_t count) {
  ObjectStream stream(cfg, count);
  std::vector<ObjectInstance> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    auto o = stream.next();
    o.x_cm = -double(i) * cfg.pitch_cm;
    out.push_back(std::move(o));
  }
  return out;
}

namespace {

Tool make_tool(std::string id, ToolKind kind, Roi roi, double min, double max) {
  Tool t;
  t.id = std::move(id);
  t.kind = kind;
  t.roi = roi;
  t.min = min;
  t.max = max;
  return t;
}

}  // namespace

InspectionRecipe recipe_for(CaseKind kind) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  InspectionRecipe r;
  r.case_kind = kind;
  switch (kind) {
    case CaseKind::A: {
      const Roi code{190, 170, 450, 310};
      Tool bars = make_tool("code_bars", ToolKind::BarRuns, code, 12, 12);
      bars.scan_row = 240;
      Tool contrast = make_tool("code_contrast", ToolKind::Contrast, code, 0.5, kInf);
      contrast.scan_row = 240;
      r.tools = {bars, contrast};
      break;
    }
    case CaseKind::B: {
      Tool site = make_tool("resistor_site", ToolKind::BlobCount,
                            {235, 195, 405, 285}, 1, 1);
      site.threshold = 160;
      site.min_area = 400;
      r.tools = {site};
      break;
    }
    case CaseKind::C: {
      const Roi heads{170, 150, 470, 330};
      Tool count = make_tool("screw_heads", ToolKind::BlobCount, heads, 2, 2);
      count.min_area = 500;
      Tool shape = make_tool("head_shape", ToolKind::Circularity, heads, -kInf, 0.95);
      shape.min_area = 500;
      r.tools = {count, shape};
      break;
    }
  }
  return r;
}

}  // namespace beltline
