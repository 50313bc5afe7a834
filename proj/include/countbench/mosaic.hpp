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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "countbench/core.hpp"

namespace countbench {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

// 8-bit RGB image, interleaved, row-major.
struct Raster {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> pixels;

  Raster() = default;
  Raster(std::uint32_t w, std::uint32_t h, Rgb fill = {});

  Rgb at(std::uint32_t x, std::uint32_t y) const;
  void set(std::uint32_t x, std::uint32_t y, Rgb c);
  bool operator==(const Raster&) const = default;
};

enum class WidthPolicy { resize_negative_to_positive_width, pad_to_max_width };
enum class Resample { bilinear };

struct ComposePolicy {
  WidthPolicy width_policy = WidthPolicy::resize_negative_to_positive_width;
  Resample resample = Resample::bilinear;
  Rgb background{0, 0, 0};
};

WidthPolicy parse_width_policy(std::string_view text);
std::string_view to_string(WidthPolicy policy);

struct ComposedMosaic {
  Raster image;
  std::uint32_t boundary_row = 0;  // first row of the negative image
};

// Stacks the positive image above the negative one. Throws InputError for
// zero-area inputs.
ComposedMosaic compose_mosaic(const Raster& pos, const Raster& neg, const ComposePolicy& policy);

std::string mosaic_filename(std::string_view pos_image_id, std::string_view neg_image_id);

// Density row of the seam: round(boundary * height / mosaic_height) clamped to
// [1, height - 1]. Without geometry the map is cut at half height.
struct SeamGeometry {
  std::uint32_t boundary_row = 0;
  std::uint32_t mosaic_height = 0;
};
std::uint32_t seam_row(std::uint32_t density_height, const std::optional<SeamGeometry>& geometry);

struct SplitCounts {
  double c_pos = 0.0;
  double c_neg = 0.0;
};

// Integrates the two halves of a mosaic density map separately, each sum
// clamped at zero.
SplitCounts split_density(const DensityMap& d, std::uint32_t boundary_row_image, std::uint32_t mosaic_height_image);
SplitCounts split_density_at(const DensityMap& d, std::uint32_t density_row);

}  // namespace countbench
