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

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace beltline {

inline constexpr int kFrameWidth = 640;
inline constexpr int kFrameHeight = 480;

/// 8-bit grayscale raster, row-major. Camera frames are 640x480; the
/// primitives accept any size.
class Image {
 public:
  Image() = default;
  Image(int width, int height, std::uint8_t fill = 0);
  Image(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return pixels_.size(); }
  bool empty() const { return pixels_.empty(); }

  std::uint8_t at(int x, int y) const { return pixels_[index(x, y)]; }
  std::uint8_t& at(int x, int y) { return pixels_[index(x, y)]; }
  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  std::span<const std::uint8_t> pixels() const { return pixels_; }
  std::span<std::uint8_t> pixels() { return pixels_; }

  bool operator==(const Image&) const = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

using Frame = Image;

/// Binary image; every pixel is 0 (background) or 1 (foreground).
struct Mask {
  Mask() = default;
  Mask(int w, int h) : width(w), height(h), bits(std::size_t(w) * h, 0) {}

  bool at(int x, int y) const { return bits[std::size_t(y) * width + x] != 0; }
  void set(int x, int y, bool v) { bits[std::size_t(y) * width + x] = v; }
  bool inside(int x, int y) const {
    return x >= 0 && y >= 0 && x < width && y < height;
  }
  std::size_t count() const;

  bool operator==(const Mask&) const = default;

  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;
};

/// Half-open pixel rectangle [x0, x1) x [y0, y1).
struct Roi {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool empty() const { return x1 <= x0 || y1 <= y0; }
  bool inside(int w, int h) const {
    return x0 >= 0 && y0 >= 0 && x1 <= w && y1 <= h && !empty();
  }
  static Roi whole(const Image& img) { return {0, 0, img.width(), img.height()}; }

  bool operator==(const Roi&) const = default;
};

struct Histogram {
  std::array<std::uint64_t, 256> bins{};

  std::uint64_t total() const;
};

struct Blob {
  int label = 0;
  std::int64_t area = 0;
  std::int64_t perimeter = 0;   // crack count: pixel sides facing background
  double contour_length = 0.0;  // corner-corrected outer chain length
  double cx = 0.0, cy = 0.0;
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // inclusive bounding box
};

/// Label raster (0 = background, blobs numbered from 1 in raster order of
/// their first pixel) plus the per-blob measurements.
struct Labeling {
  int width = 0;
  int height = 0;
  std::vector<int> labels;
  std::vector<Blob> blobs;

  int at(int x, int y) const { return labels[std::size_t(y) * width + x]; }
};

Histogram histogram(const Image& frame);
Histogram histogram(const Image& frame, const Roi& roi);

/// Otsu's threshold: the t that maximizes the between-class variance of
/// the split {<= t} / {> t}. Ties go to the lowest t; a single-valued
/// histogram returns that value. Throws Error on an empty histogram.
int otsu_threshold(const Histogram& hist);

/// Between-class variance w0*w1*(mu0 - mu1)^2 of the split at t.
double between_class_variance(const Histogram& hist, int t);

Mask binarize(const Image& frame, int t);
Mask binarize(const Image& frame, const Roi& roi, int t);

/// 3x3 box structuring element; pixels outside the image are background.
Mask erode(const Mask& in);
Mask dilate(const Mask& in);
Mask open(const Mask& in);
Mask complement(const Mask& in);

/// 8-connected labeling with full blob measurements.
Labeling label_components(const Mask& mask);
std::vector<Blob> connected_components(const Mask& mask);

/// 4*pi*area / perimeter^2, capped at 1. A zero perimeter gives 1.
double circularity(double area, double perimeter);
double circularity(const Blob& blob);

struct BarRuns {
  int dark_runs = 0;
  double min_contrast = 0.0;  // (mean light - mean dark) / 255 inside the ROI
  int threshold = 0;
};

/// Otsu-binarizes the ROI and counts maximal dark runs along scan_row.
/// Throws RangeError if the ROI leaves the frame or misses scan_row.
BarRuns bar_runs(const Image& frame, const Roi& roi, int scan_row);

/// Binary PGM (P5, maxval 255).
std::string encode_pgm(const Image& img);
Image decode_pgm(std::string_view bytes);
void write_pgm(const std::filesystem::path& path, const Image& img);
Image read_pgm(const std::filesystem::path& path);

}  // namespace beltline
