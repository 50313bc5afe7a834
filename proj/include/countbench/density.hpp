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

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "countbench/core.hpp"

namespace countbench {

// Count estimate of a density map: max(0, sum of values). Throws InputError
// on NaN or Inf.
double sum_count(const DensityMap& d);

struct UnitDot {};
struct GaussianKernel {
  double sigma = 1.0;
};
using DotKernel = std::variant<UnitDot, GaussianKernel>;

// Renders dot annotations. UnitDot adds 1 to the cell holding each point.
// GaussianKernel adds a discretized kernel truncated at 4 sigma and
// renormalized over the in-grid cells, so every point contributes unit mass
// even at the border.
DensityMap render_from_points(std::span<const Point> points, std::uint32_t height, std::uint32_t width,
                              const DotKernel& kernel);

// DMAP v1 layout, all integers little-endian:
//   0  "DMAP"
//   4  u32 version = 1
//   8  u32 height
//   12 u32 width
//   16 u32 reserved = 0
//   20 height * width binary32 values, row-major, top row first
inline constexpr std::size_t kDmapHeaderSize = 20;
inline constexpr std::uint32_t kDmapVersion = 1;

std::vector<std::uint8_t> encode_dmap(const DensityMap& d);
// Throws FormatError carrying the byte offset of the first problem.
DensityMap decode_dmap(std::span<const std::uint8_t> bytes);

// Plain-text fallback: one row per line, comma separated, uniform width.
std::string encode_density_csv(const DensityMap& d);
DensityMap decode_density_csv(std::string_view text);

}  // namespace countbench
