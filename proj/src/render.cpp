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

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "beltline/camera.h"

namespace beltline {
namespace {

// Scene geometry in pixels at kPxPerCm, relative to the part center.
constexpr double kBodyHalfHeight = 100.0;  // 4 cm belt width

constexpr double kLabelLevel = 215.0;
constexpr double kInkLevel = 35.0;
constexpr double kBarWidth = 8.0;
constexpr double kBarPitch = 16.0;
constexpr double kBarHalfHeight = 60.0;

constexpr double kBoardLevel = 100.0;
constexpr double kResistorLevel = 225.0;

constexpr double kPlateLevel = 70.0;
constexpr double kHeadLevel = 210.0;
constexpr double kHeadInradius = 34.0;
constexpr double kHeadSpacing = 80.0;

// Canvas of unscaled scene levels; anti-aliasing by linear coverage of a
// signed distance.
class Canvas {
 public:
  Canvas() : v_(std::size_t(kFrameWidth) * kFrameHeight, kBackgroundLevel) {}

  template <typename Sdf>
  void fill(double cx, double cy, double reach, double level, Sdf sdf) {
    const int xa = std::max(0, int(std::floor(cx - reach)));
    const int xb = std::min(kFrameWidth - 1, int(std::ceil(cx + reach)));
    const int ya = std::max(0, int(std::floor(cy - reach)));
    const int yb = std::min(kFrameHeight - 1, int(std::ceil(cy + reach)));
    for (int y = ya; y <= yb; ++y) {
      for (int x = xa; x <= xb; ++x) {
        const double cov = std::clamp(0.5 - sdf(x - cx, y - cy), 0.0, 1.0);
        if (cov <= 0.0) continue;
        double& p = v_[std::size_t(y) * kFrameWidth + x];
        p += (level - p) * cov;
      }
    }
  }

  void box(double cx, double cy, double hw, double hh, double level) {
    fill(cx, cy, std::max(hw, hh) + 1.0, level, [=](double px, double py) {
      const double qx = std::abs(px) - hw, qy = std::abs(py) - hh;
      return std::hypot(std::max(qx, 0.0), std::max(qy, 0.0)) +
             std::min(std::max(qx, qy), 0.0);
    });
  }

  void disc(double cx, double cy, double r, double level) {
    fill(cx, cy, r + 1.0, level,
         [=](double px, double py) { return std::hypot(px, py) - r; });
  }

  /// Regular hexagon by inradius, corners rounded by `rounding` * inradius.
  void hexagon(double cx, double cy, double inradius, double rot,
               double rounding, double level) {
    const double c = std::cos(rot), s = std::sin(rot);
    const double rr = std::clamp(rounding, 0.0, 1.0) * inradius;
    const double core = inradius - rr;
    fill(cx, cy, inradius * 1.16 + 1.0, level, [=](double px, double py) {
      double x = std::abs(c * px + s * py);
      double y = std::abs(-s * px + c * py);
      constexpr double kx = -0.866025404, ky = 0.5, kz = 0.577350269;
      const double d = std::min(kx * x + ky * y, 0.0);
      x -= 2.0 * d * kx;
      y -= 2.0 * d * ky;
      x -= std::clamp(x, -kz * core, kz * core);
      y -= core;
      return std::hypot(x, y) * (y < 0.0 ? -1.0 : 1.0) - rr;
    });
  }

  void motion_blur(double length_px) {
    const int n = std::max(1, int(std::lround(length_px)));
    if (n <= 1) return;
    std::vector<double> row(kFrameWidth);
    for (int y = 0; y < kFrameHeight; ++y) {
      double* line = &v_[std::size_t(y) * kFrameWidth];
      std::copy(line, line + kFrameWidth, row.begin());
      for (int x = 0; x < kFrameWidth; ++x) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k) acc += row[std::clamp(x - k, 0, kFrameWidth - 1)];
        line[x] = acc / n;
      }
    }
  }

  Frame finish(const Illumination& illum, std::uint64_t seed, double sigma) const {
    std::vector<std::uint8_t> px(v_.size());
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma > 0.0 ? sigma : 1.0);
    for (std::size_t i = 0; i < v_.size(); ++i) {
      double p = kBackgroundLevel + (v_[i] - kBackgroundLevel) * illum.relative_lux;
      if (sigma > 0.0) p += noise(rng);
      px[i] = static_cast<std::uint8_t>(std::clamp(std::lround(p), 0L, 255L));
    }
    return Frame(kFrameWidth, kFrameHeight, std::move(px));
  }

 private:
  std::vector<double> v_;
};

void draw(Canvas& cv, double cx, double cy, double body_hw,
          const BarcodeAppearance& a) {
  cv.box(cx, cy, body_hw, kBodyHalfHeight, kLabelLevel);
  const double ink = kInkLevel + a.ink_lift * (kLabelLevel - kInkLevel);
  const double first = cx - 0.5 * (a.bar_count - 1) * kBarPitch;
  for (int i = 0; i < a.bar_count; ++i) {
    const double level = i == a.fade_at ? ink + a.fade * (kLabelLevel - ink) : ink;
    cv.box(first + i * kBarPitch, cy, 0.5 * kBarWidth, kBarHalfHeight, level);
  }
  if (a.merge_at >= 0 && a.merge_at + 1 < a.bar_count) {
    const double gap = 0.5 * (kBarPitch - kBarWidth);
    const double level = kLabelLevel - a.merge_fill * (kLabelLevel - ink);
    cv.box(first + (a.merge_at + 0.5) * kBarPitch, cy, gap, kBarHalfHeight, level);
  }
}

void draw(Canvas& cv, double cx, double cy, double body_hw,
          const BoardAppearance& a) {
  cv.box(cx, cy, body_hw, kBodyHalfHeight, kBoardLevel);
  cv.box(cx - 147.0, cy, 25.0, 35.0, 45.0);  // IC
  cv.disc(cx + 147.0, cy, 22.0, 195.0);      // electrolytic capacitor
  if (a.resistor_present) {
    cv.box(cx, cy, 40.0, 15.0, kResistorLevel);
  } else if (a.site_residue > 0.0) {
    cv.box(cx, cy, 36.0, 12.0, kBoardLevel + a.site_residue);
  }
  if (a.stray_residue > 0.0)
    cv.box(cx - 45.0, cy + 32.0, 20.0, 10.0, kBoardLevel + a.stray_residue);
}

void draw(Canvas& cv, double cx, double cy, double body_hw,
          const ScrewAppearance& a) {
  cv.box(cx, cy, body_hw, kBodyHalfHeight, kPlateLevel);
  for (int i = 0; i < 2; ++i) {
    const double hx = cx + (i == 0 ? -kHeadSpacing : kHeadSpacing);
    const double rounding = i == a.round_head ? a.rounding : 0.0;
    cv.hexagon(hx, cy, kHeadInradius, a.rotation_rad[i], rounding, kHeadLevel);
  }
}

}  // namespace

Frame render(const ObjectInstance& object, const Illumination& illum,
             std::uint64_t noise_seed, const RenderOptions& opts) {
  Canvas cv;
  const double cx = 0.5 * kFrameWidth + opts.offset_px;
  const double cy = 0.5 * kFrameHeight;
  const double body_hw = 0.5 * object.length_cm * kPxPerCm;
  std::visit([&](const auto& a) { draw(cv, cx, cy, body_hw, a); },
             object.appearance);
  if (opts.blur_px > 1.0) cv.motion_blur(opts.blur_px);
  return cv.finish(illum, noise_seed, opts.noise_sigma);
}

Frame render_empty(const Illumination& illum, std::uint64_t noise_seed,
                   const RenderOptions& opts) {
  Canvas cv;
  return cv.finish(illum, noise_seed, opts.noise_sigma);
}

}  // namespace beltline
