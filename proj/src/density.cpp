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

#include "countbench/density.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>

#include "countbench/errors.hpp"
#include "countbench/kernels.hpp"

namespace countbench {

namespace {

void require_finite(const DensityMap& d) {
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    if (!std::isfinite(d.values[i])) {
      throw InputError("density map has a non-finite value at row " + std::to_string(i / d.width) + ", col " +
                       std::to_string(i % d.width));
    }
  }
}

std::uint8_t* put_u32(std::uint8_t* out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) *out++ = std::uint8_t(v >> shift);
  return out;
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return std::uint32_t(bytes[offset]) | std::uint32_t(bytes[offset + 1]) << 8 |
         std::uint32_t(bytes[offset + 2]) << 16 | std::uint32_t(bytes[offset + 3]) << 24;
}

std::string point_text(const Point& p) {
  return "(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")";
}

}  // namespace

double sum_count(const DensityMap& d) {
  require_finite(d);
  const double total = kernels::pairwise_sum(std::span<const float>(d.values));
  return total > 0.0 ? total : 0.0;
}

DensityMap render_from_points(std::span<const Point> points, std::uint32_t height, std::uint32_t width,
                              const DotKernel& kernel) {
  if (height == 0 || width == 0) throw InputError("density map dimensions must be positive");
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point& p = points[i];
    if (!(p.x >= 0.0 && p.x < double(width) && p.y >= 0.0 && p.y < double(height))) {
      throw InputError("point " + std::to_string(i) + " " + point_text(p) + " outside the " +
                       std::to_string(width) + "x" + std::to_string(height) + " grid");
    }
  }

  std::vector<double> acc(std::size_t{height} * width, 0.0);
  if (const auto* g = std::get_if<GaussianKernel>(&kernel)) {
    if (!(g->sigma > 0.0) || !std::isfinite(g->sigma)) throw InputError("gaussian sigma must be positive");
    std::vector<double> xy;
    xy.reserve(points.size() * 2);
    for (const Point& p : points) {
      xy.push_back(p.x);
      xy.push_back(p.y);
    }
    kernels::splat_gaussian(xy, g->sigma, height, width, acc);
  } else {
    for (const Point& p : points) {
      acc[std::size_t(p.y) * width + std::size_t(p.x)] += 1.0;
    }
  }

  DensityMap d(height, width);
  for (std::size_t i = 0; i < acc.size(); ++i) d.values[i] = float(acc[i]);
  return d;
}

std::vector<std::uint8_t> encode_dmap(const DensityMap& d) {
  if (d.values.size() != std::size_t{d.height} * d.width) {
    throw InputError("density map value count does not match its dimensions");
  }
  std::vector<std::uint8_t> out(kDmapHeaderSize + d.values.size() * 4);
  std::memcpy(out.data(), "DMAP", 4);
  std::uint8_t* p = put_u32(out.data() + 4, kDmapVersion);
  p = put_u32(p, d.height);
  p = put_u32(p, d.width);
  p = put_u32(p, 0);
  for (float v : d.values) p = put_u32(p, std::bit_cast<std::uint32_t>(v));
  return out;
}

DensityMap decode_dmap(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "DMAP", 4) != 0) {
    throw FormatError(0, "bad magic, expected \"DMAP\"");
  }
  if (bytes.size() < kDmapHeaderSize) throw FormatError(bytes.size(), "truncated header");
  if (const auto version = get_u32(bytes, 4); version != kDmapVersion) {
    throw FormatError(4, "unsupported version " + std::to_string(version));
  }
  const std::uint32_t height = get_u32(bytes, 8);
  const std::uint32_t width = get_u32(bytes, 12);
  if (height == 0) throw FormatError(8, "height must be positive");
  if (width == 0) throw FormatError(12, "width must be positive");
  if (get_u32(bytes, 16) != 0) throw FormatError(16, "reserved field must be zero");

  const std::uint64_t cells = std::uint64_t{height} * width;
  if (cells > (std::numeric_limits<std::size_t>::max() - kDmapHeaderSize) / 4) {
    throw FormatError(8, "dimensions overflow");
  }
  const std::size_t expected = kDmapHeaderSize + std::size_t(cells) * 4;
  if (bytes.size() < expected) {
    throw FormatError(bytes.size(), "truncated payload, expected " + std::to_string(expected) + " bytes");
  }
  if (bytes.size() > expected) throw FormatError(expected, "trailing bytes after payload");

  DensityMap d;
  d.height = height;
  d.width = width;
  d.values.resize(std::size_t(cells));
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    const std::size_t offset = kDmapHeaderSize + i * 4;
    const float v = std::bit_cast<float>(get_u32(bytes, offset));
    if (!std::isfinite(v)) throw FormatError(offset, "non-finite value");
    d.values[i] = v;
  }
  return d;
}

std::string encode_density_csv(const DensityMap& d) {
  std::string out;
  char buf[32];
  for (std::uint32_t r = 0; r < d.height; ++r) {
    for (std::uint32_t c = 0; c < d.width; ++c) {
      if (c > 0) out += ',';
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, d.at(r, c));
      out.append(buf, end);
    }
    out += '\n';
  }
  return out;
}

DensityMap decode_density_csv(std::string_view text) {
  std::vector<float> values;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    std::uint32_t cols = 0;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t sep = line.find(',', pos);
      if (sep == std::string_view::npos) sep = line.size();
      std::string_view field = line.substr(pos, sep - pos);
      while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
      while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
      float v = 0.0f;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(v)) {
        throw InputError("density csv line " + std::to_string(line_no) + ": bad value '" + std::string(field) + "'");
      }
      values.push_back(v);
      ++cols;
      pos = sep + 1;
    }
    if (width == 0) {
      width = cols;
    } else if (cols != width) {
      throw InputError("density csv line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                       " columns, got " + std::to_string(cols));
    }
    ++height;
  }
  if (height == 0) throw InputError("density csv is empty");
  DensityMap d;
  d.height = height;
  d.width = width;
  d.values = std::move(values);
  return d;
}

}  // namespace countbench
