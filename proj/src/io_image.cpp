// Copyright 2026 The countbench Authors. All Rights Reserved.
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
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "countbench/density.hpp"
#include "countbench/errors.hpp"
#include "countbench/io.hpp"

namespace countbench::io {

namespace {

cv::Mat to_bgr(const Raster& r) {
  cv::Mat m(int(r.height), int(r.width), CV_8UC3);
  for (std::uint32_t y = 0; y < r.height; ++y) {
    auto* row = m.ptr<cv::Vec3b>(int(y));
    for (std::uint32_t x = 0; x < r.width; ++x) {
      const Rgb c = r.at(x, y);
      row[x] = cv::Vec3b(c.b, c.g, c.r);
    }
  }
  return m;
}

Raster from_bgr(const cv::Mat& m) {
  Raster r(std::uint32_t(m.cols), std::uint32_t(m.rows));
  for (int y = 0; y < m.rows; ++y) {
    const auto* row = m.ptr<cv::Vec3b>(y);
    for (int x = 0; x < m.cols; ++x) r.set(std::uint32_t(x), std::uint32_t(y), {row[x][2], row[x][1], row[x][0]});
  }
  return r;
}

void put_label(cv::Mat& m, const std::string& text, cv::Point at, const cv::Scalar& color) {
  cv::putText(m, text, at, cv::FONT_HERSHEY_SIMPLEX, 0.4, color, 1, cv::LINE_8);
}

}  // namespace

Raster load_image(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("image not found: " + path.string());
  const cv::Mat m = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (m.empty()) throw InputError("cannot decode image " + path.string());
  if (m.cols == 0 || m.rows == 0) throw InputError("image has zero area: " + path.string());
  return from_bgr(m);
}

std::vector<std::uint8_t> encode_png(const Raster& r) {
  std::vector<std::uint8_t> out;
  if (!cv::imencode(".png", to_bgr(r), out, {cv::IMWRITE_PNG_COMPRESSION, 6})) {
    throw Error("PNG encoding failed");
  }
  return out;
}

void save_png(const Raster& r, const fs::path& path) { write_bytes(path, encode_png(r)); }

std::optional<std::pair<std::uint32_t, std::uint32_t>> png_size(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::array<unsigned char, 24> head{};
  if (!in.read(reinterpret_cast<char*>(head.data()), head.size())) return std::nullopt;
  static constexpr unsigned char kSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (!std::equal(std::begin(kSignature), std::end(kSignature), head.begin())) return std::nullopt;
  if (!std::equal(head.begin() + 12, head.begin() + 16, "IHDR")) return std::nullopt;
  auto be32 = [&](std::size_t at) {
    return std::uint32_t(head[at]) << 24 | std::uint32_t(head[at + 1]) << 16 | std::uint32_t(head[at + 2]) << 8 |
           std::uint32_t(head[at + 3]);
  };
  return std::pair{be32(16), be32(20)};
}

// --- heat maps -------------------------------------------------------------

Rgb heat_color(double t) {
  static constexpr std::array<std::array<double, 3>, 5> kStops = {{
      {0, 0, 4}, {87, 16, 110}, {188, 55, 84}, {249, 142, 9}, {252, 255, 164},
  }};
  t = std::clamp(t, 0.0, 1.0);
  const double pos = t * double(kStops.size() - 1);
  const std::size_t i = std::min<std::size_t>(std::size_t(pos), kStops.size() - 2);
  const double f = pos - double(i);
  auto channel = [&](std::size_t k) {
    return std::uint8_t(std::lround(kStops[i][k] + f * (kStops[i + 1][k] - kStops[i][k])));
  };
  return {channel(0), channel(1), channel(2)};
}

std::uint32_t heatmap_block_size(const DensityMap& d) {
  const std::uint32_t longest = std::max(d.height, d.width);
  return std::clamp<std::uint32_t>(512 / std::max(longest, 1u), 1, 32);
}

Raster render_heatmap_raster(const DensityMap& d) {
  if (d.height == 0 || d.width == 0) throw InputError("empty density map");
  const double total = sum_count(d);  // also rejects non-finite values
  const auto [lo, hi] = std::minmax_element(d.values.begin(), d.values.end());
  const double span = double(*hi) - double(*lo);
  const std::uint32_t block = heatmap_block_size(d);

  Raster img(d.width * block, d.height * block + kHeatmapBanner);
  for (std::uint32_t r = 0; r < d.height; ++r) {
    for (std::uint32_t c = 0; c < d.width; ++c) {
      const double t = span > 0.0 ? (double(d.at(r, c)) - double(*lo)) / span : 0.0;
      const Rgb color = heat_color(t);
      for (std::uint32_t y = r * block; y < (r + 1) * block; ++y) {
        for (std::uint32_t x = c * block; x < (c + 1) * block; ++x) img.set(x, y, color);
      }
    }
  }

  cv::Mat m = to_bgr(img);
  char label[64];
  std::snprintf(label, sizeof label, "count = %.2f", total);
  put_label(m, label, {3, int(img.height) - 8}, cv::Scalar(255, 255, 255));
  return from_bgr(m);
}

void render_heatmap(const DensityMap& d, const fs::path& out_path) { save_png(render_heatmap_raster(d), out_path); }

// --- drift box plot --------------------------------------------------------

Raster render_drift_boxplot(const DriftSummary& d) {
  constexpr int kWidth = 320, kHeight = 400, kTop = 30, kBottom = 360, kLeft = 60;
  cv::Mat m(kHeight, kWidth, CV_8UC3, cv::Scalar(255, 255, 255));
  double lo = d.whisker_low, hi = d.whisker_high;
  for (const auto& o : d.outliers) {
    lo = std::min(lo, o.value);
    hi = std::max(hi, o.value);
  }
  if (hi - lo <= 0.0) hi = lo + 1.0;
  auto y_of = [&](double v) { return int(std::lround(kBottom - (v - lo) / (hi - lo) * (kBottom - kTop))); };

  const cv::Scalar ink(40, 40, 40), box_fill(230, 200, 150), median_ink(0, 0, 200);
  cv::line(m, {kLeft, kTop}, {kLeft, kBottom}, ink, 1, cv::LINE_8);
  char buf[64];
  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4.0;
    const int y = y_of(v);
    cv::line(m, {kLeft - 4, y}, {kLeft, y}, ink, 1, cv::LINE_8);
    std::snprintf(buf, sizeof buf, "%.2f", v);
    put_label(m, buf, {4, y + 4}, ink);
  }
  const int cx = 190, half = 40;
  if (d.n > 0) {
    cv::rectangle(m, {cx - half, y_of(d.q3)}, {cx + half, y_of(d.q1)}, box_fill, cv::FILLED, cv::LINE_8);
    cv::rectangle(m, {cx - half, y_of(d.q3)}, {cx + half, y_of(d.q1)}, ink, 1, cv::LINE_8);
    cv::line(m, {cx - half, y_of(d.median)}, {cx + half, y_of(d.median)}, median_ink, 2, cv::LINE_8);
    cv::line(m, {cx, y_of(d.q3)}, {cx, y_of(d.whisker_high)}, ink, 1, cv::LINE_8);
    cv::line(m, {cx, y_of(d.q1)}, {cx, y_of(d.whisker_low)}, ink, 1, cv::LINE_8);
    cv::line(m, {cx - half / 2, y_of(d.whisker_high)}, {cx + half / 2, y_of(d.whisker_high)}, ink, 1, cv::LINE_8);
    cv::line(m, {cx - half / 2, y_of(d.whisker_low)}, {cx + half / 2, y_of(d.whisker_low)}, ink, 1, cv::LINE_8);
    for (const auto& o : d.outliers) cv::circle(m, {cx, y_of(o.value)}, 3, ink, 1, cv::LINE_8);
  }
  std::snprintf(buf, sizeof buf, "drift n=%llu mean=%.3f", static_cast<unsigned long long>(d.n), d.mean);
  put_label(m, buf, {kLeft, 18}, ink);
  std::snprintf(buf, sizeof buf, "outliers=%zu", d.outliers.size());
  put_label(m, buf, {kLeft, kHeight - 16}, ink);
  return from_bgr(m);
}

}  // namespace countbench::io
