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

#include "beltline/vision.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "beltline/error.h"

namespace beltline {

Image::Image(int width, int height, std::uint8_t fill)
    : width_(width),
      height_(height),
      pixels_(static_cast<std::size_t>(width) * height, fill) {
  if (width < 0 || height < 0) throw RangeError("size", "negative image size");
}

Image::Image(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width < 0 || height < 0 ||
      pixels_.size() != static_cast<std::size_t>(width) * height)
    throw RangeError("size", "pixel count does not match width*height");
}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), 1));
}

std::uint64_t Histogram::total() const {
  std::uint64_t n = 0;
  for (auto b : bins) n += b;
  return n;
}

Histogram histogram(const Image& frame) {
  Histogram h;
  for (auto v : frame.pixels()) ++h.bins[v];
  return h;
}

Histogram histogram(const Image& frame, const Roi& roi) {
  Histogram h;
  for (int y = roi.y0; y < roi.y1; ++y)
    for (int x = roi.x0; x < roi.x1; ++x) ++h.bins[frame.at(x, y)];
  return h;
}

double between_class_variance(const Histogram& hist, int t) {
  double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
  for (int v = 0; v < 256; ++v) {
    const double c = static_cast<double>(hist.bins[v]);
    if (v <= t) {
      n0 += c;
      s0 += c * v;
    } else {
      n1 += c;
      s1 += c * v;
    }
  }
  const double n = n0 + n1;
  if (n0 == 0 || n1 == 0) return 0.0;
  const double w0 = n0 / n, w1 = n1 / n;
  const double d = s0 / n0 - s1 / n1;
  return w0 * w1 * d * d;
}

int otsu_threshold(const Histogram& hist) {
  std::uint64_t n = 0;
  int nonzero = 0, only = 0;
  long double total_sum = 0;
  for (int v = 0; v < 256; ++v) {
    if (hist.bins[v] == 0) continue;
    n += hist.bins[v];
    total_sum += static_cast<long double>(hist.bins[v]) * v;
    ++nonzero;
    only = v;
  }
  if (n == 0) throw Error("otsu_threshold: empty histogram");
  if (nonzero == 1) return only;

  // Running class sums; sigma_B^2 = (mu_T*w0 - mu(t))^2 / (w0*w1) in count
  // units, scaled by n^2 which does not move the argmax.
  const long double total = static_cast<long double>(n);
  long double n0 = 0, s0 = 0, best = -1;
  int best_t = 0;
  for (int t = 0; t < 256; ++t) {
    n0 += hist.bins[t];
    s0 += static_cast<long double>(hist.bins[t]) * t;
    const long double n1 = total - n0;
    long double score = 0;
    if (n0 > 0 && n1 > 0) {
      const long double num = total * s0 - n0 * total_sum;
      score = num * num / (n0 * n1);
    }
    if (score > best) {
      best = score;
      best_t = t;
    }
  }
  return best_t;
}

Mask binarize(const Image& frame, int t) {
  return binarize(frame, Roi::whole(frame), t);
}

Mask binarize(const Image& frame, const Roi& roi, int t) {
  Mask m(roi.width(), roi.height());
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x)
      m.set(x, y, frame.at(roi.x0 + x, roi.y0 + y) > t);
  return m;
}

namespace {

template <bool kAll>
Mask box3(const Mask& in) {
  Mask out(in.width, in.height);
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      bool acc = kAll;
      for (int dy = -1; dy <= 1 && acc == kAll; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const bool v = in.inside(x + dx, y + dy) && in.at(x + dx, y + dy);
          if (v != kAll) {
            acc = v;
            break;
          }
        }
      }
      out.set(x, y, acc);
    }
  }
  return out;
}

}  // namespace

Mask erode(const Mask& in) { return box3<true>(in); }
Mask dilate(const Mask& in) { return box3<false>(in); }
Mask open(const Mask& in) { return dilate(erode(in)); }

Mask complement(const Mask& in) {
  Mask out = in;
  for (auto& b : out.bits) b = b ? 0 : 1;
  return out;
}

namespace {

int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

void unite(std::vector<int>& parent, int a, int b) {
  a = find_root(parent, a);
  b = find_root(parent, b);
  if (a == b) return;
  if (a < b) std::swap(a, b);
  parent[a] = b;
}

// Chain directions, counterclockwise on screen starting east.
constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kDy[8] = {0, -1, -1, -1, 0, 1, 1, 1};

// Outer boundary by Moore tracing from the blob's first raster pixel, then
// the Vossepoel-Smeulders length estimate 0.980*even + 1.406*odd - 0.091*corners.
double trace_contour_length(const Labeling& lab, int label, int sx, int sy) {
  auto is_fg = [&](int x, int y) {
    return x >= 0 && y >= 0 && x < lab.width && y < lab.height &&
           lab.at(x, y) == label;
  };

  std::vector<int> codes;
  int x = sx, y = sy, dir = 7;
  int first_x = -1, first_y = -1;
  for (std::size_t guard = 0;; ++guard) {
    const int start = (dir % 2 == 0) ? (dir + 7) % 8 : (dir + 6) % 8;
    int found = -1;
    for (int k = 0; k < 8; ++k) {
      const int d = (start + k) % 8;
      if (is_fg(x + kDx[d], y + kDy[d])) {
        found = d;
        break;
      }
    }
    if (found < 0) return std::numbers::pi;  // isolated pixel

    const int nx = x + kDx[found], ny = y + kDy[found];
    if (codes.empty()) {
      first_x = nx;
      first_y = ny;
    } else if (x == sx && y == sy && nx == first_x && ny == first_y) {
      break;
    }
    codes.push_back(found);
    x = nx;
    y = ny;
    dir = found;
    if (guard > 8 * lab.labels.size() + 16) break;
  }

  int even = 0, odd = 0, corners = 0;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    (codes[i] % 2 == 0 ? even : odd)++;
    if (codes[i] != codes[(i + 1) % codes.size()]) ++corners;
  }
  // The chain runs through pixel centers; offsetting it outward by half a
  // pixel to the region edge adds pi for a closed curve.
  return 0.980 * even + 1.406 * odd - 0.091 * corners + std::numbers::pi;
}

}  // namespace

Labeling label_components(const Mask& mask) {
  const int w = mask.width, h = mask.height;
  Labeling lab;
  lab.width = w;
  lab.height = h;
  lab.labels.assign(std::size_t(w) * h, 0);

  std::vector<int> parent(1, 0);
  int next = 1;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y)) continue;
      // Already-visited 8-neighbors: W, NW, N, NE.
      int nb[4] = {0, 0, 0, 0};
      if (x > 0) nb[0] = lab.at(x - 1, y);
      if (y > 0) {
        if (x > 0) nb[1] = lab.at(x - 1, y - 1);
        nb[2] = lab.at(x, y - 1);
        if (x + 1 < w) nb[3] = lab.at(x + 1, y - 1);
      }
      int cur = 0;
      for (int n : nb) {
        if (n == 0) continue;
        if (cur == 0) cur = n;
        else unite(parent, cur, n);
      }
      if (cur == 0) {
        cur = next++;
        parent.push_back(cur);
      }
      lab.labels[std::size_t(y) * w + x] = cur;
    }
  }

  // Resolve provisional labels to final ids in raster order of first pixel.
  std::vector<int> final_id(parent.size(), 0);
  int count = 0;
  std::vector<std::pair<int, int>> first_pixel;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int& l = lab.labels[std::size_t(y) * w + x];
      if (l == 0) continue;
      const int root = find_root(parent, l);
      if (final_id[root] == 0) {
        final_id[root] = ++count;
        first_pixel.emplace_back(x, y);
      }
      l = final_id[root];
    }
  }

  lab.blobs.resize(count);
  std::vector<double> sx(count, 0.0), sy(count, 0.0);
  for (int i = 0; i < count; ++i) {
    Blob& b = lab.blobs[i];
    b.label = i + 1;
    b.x0 = w;
    b.y0 = h;
    b.x1 = -1;
    b.y1 = -1;
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int l = lab.at(x, y);
      if (l == 0) continue;
      Blob& b = lab.blobs[l - 1];
      ++b.area;
      sx[l - 1] += x;
      sy[l - 1] += y;
      b.x0 = std::min(b.x0, x);
      b.y0 = std::min(b.y0, y);
      b.x1 = std::max(b.x1, x);
      b.y1 = std::max(b.y1, y);
      if (x == 0 || lab.at(x - 1, y) != l) ++b.perimeter;
      if (x + 1 == w || lab.at(x + 1, y) != l) ++b.perimeter;
      if (y == 0 || lab.at(x, y - 1) != l) ++b.perimeter;
      if (y + 1 == h || lab.at(x, y + 1) != l) ++b.perimeter;
    }
  }
  for (int i = 0; i < count; ++i) {
    Blob& b = lab.blobs[i];
    b.cx = sx[i] / b.area;
    b.cy = sy[i] / b.area;
    b.contour_length = trace_contour_length(lab, b.label, first_pixel[i].first,
                                            first_pixel[i].second);
  }
  return lab;
}

std::vector<Blob> connected_components(const Mask& mask) {
  return label_components(mask).blobs;
}

double circularity(double area, double perimeter) {
  if (perimeter <= 0.0) return 1.0;
  return std::min(1.0, 4.0 * std::numbers::pi * area / (perimeter * perimeter));
}

double circularity(const Blob& blob) {
  return circularity(static_cast<double>(blob.area), blob.contour_length);
}

BarRuns bar_runs(const Image& frame, const Roi& roi, int scan_row) {
  if (!roi.inside(frame.width(), frame.height()))
    throw RangeError("roi", "bar_runs: ROI outside frame");
  if (scan_row < roi.y0 || scan_row >= roi.y1)
    throw RangeError("scan_row", "bar_runs: scan row outside ROI");

  const Histogram h = histogram(frame, roi);
  const int t = otsu_threshold(h);
  BarRuns out;
  out.threshold = t;

  double n_dark = 0, s_dark = 0, n_light = 0, s_light = 0;
  for (int v = 0; v < 256; ++v) {
    const double c = static_cast<double>(h.bins[v]);
    if (v <= t) {
      n_dark += c;
      s_dark += c * v;
    } else {
      n_light += c;
      s_light += c * v;
    }
  }
  if (n_dark == 0 || n_light == 0) return out;  // no contrast, no bars
  out.min_contrast = (s_light / n_light - s_dark / n_dark) / 255.0;

  bool in_run = false;
  for (int x = roi.x0; x < roi.x1; ++x) {
    const bool dark = frame.at(x, scan_row) <= t;
    if (dark && !in_run) ++out.dark_runs;
    in_run = dark;
  }
  return out;
}

std::string encode_pgm(const Image& img) {
  std::string out = "P5\n" + std::to_string(img.width()) + " " +
                    std::to_string(img.height()) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.pixels().data()), img.size());
  return out;
}

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string pgm_token(std::string_view bytes, std::size_t& pos) {
  for (;;) {
    while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos])))
      ++pos;
    if (pos < bytes.size() && bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  const std::size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos])))
    ++pos;
  return std::string(bytes.substr(start, pos - start));
}

}  // namespace

Image decode_pgm(std::string_view bytes) {
  std::size_t pos = 0;
  if (pgm_token(bytes, pos) != "P5") throw Error("pgm: not a binary PGM (P5)");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(pgm_token(bytes, pos));
    h = std::stoi(pgm_token(bytes, pos));
    maxval = std::stoi(pgm_token(bytes, pos));
  } catch (const std::exception&) {
    throw Error("pgm: malformed header");
  }
  if (maxval != 255) throw Error("pgm: only maxval 255 is supported");
  if (w <= 0 || h <= 0) throw Error("pgm: bad dimensions");
  ++pos;  // single whitespace byte after maxval
  const std::size_t n = std::size_t(w) * h;
  if (bytes.size() < pos + n) throw Error("pgm: truncated pixel data");
  std::vector<std::uint8_t> px(bytes.begin() + pos, bytes.begin() + pos + n);
  return Image(w, h, std::move(px));
}

void write_pgm(const std::filesystem::path& path, const Image& img) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("pgm: cannot open " + path.string());
  const std::string data = encode_pgm(img);
  f.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!f) throw Error("pgm: write failed for " + path.string());
}

Image read_pgm(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("pgm: cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return decode_pgm(ss.str());
}

}  // namespace beltline
