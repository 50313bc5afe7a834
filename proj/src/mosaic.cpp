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

#include "countbench/mosaic.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <span>

#include "countbench/errors.hpp"
#include "countbench/kernels.hpp"

namespace countbench {

Raster::Raster(std::uint32_t w, std::uint32_t h, Rgb fill) : width(w), height(h), pixels(std::size_t{w} * h * 3) {
  for (std::size_t i = 0; i < pixels.size(); i += 3) {
    pixels[i] = fill.r;
    pixels[i + 1] = fill.g;
    pixels[i + 2] = fill.b;
  }
}

Rgb Raster::at(std::uint32_t x, std::uint32_t y) const {
  const std::size_t i = (std::size_t{y} * width + x) * 3;
  return {pixels[i], pixels[i + 1], pixels[i + 2]};
}

void Raster::set(std::uint32_t x, std::uint32_t y, Rgb c) {
  const std::size_t i = (std::size_t{y} * width + x) * 3;
  pixels[i] = c.r;
  pixels[i + 1] = c.g;
  pixels[i + 2] = c.b;
}

WidthPolicy parse_width_policy(std::string_view text) {
  if (text == "resize_negative_to_positive_width" || text == "resize") {
    return WidthPolicy::resize_negative_to_positive_width;
  }
  if (text == "pad_to_max_width" || text == "pad") return WidthPolicy::pad_to_max_width;
  throw ConfigError("unknown width policy '" + std::string(text) + "'");
}

std::string_view to_string(WidthPolicy policy) {
  return policy == WidthPolicy::resize_negative_to_positive_width ? "resize_negative_to_positive_width"
                                                                  : "pad_to_max_width";
}

namespace {

void check_raster(const Raster& r, const char* which) {
  if (r.width == 0 || r.height == 0) {
    throw InputError(std::string(which) + " image has zero area");
  }
  if (r.pixels.size() != std::size_t{r.width} * r.height * 3) {
    throw InputError(std::string(which) + " image buffer does not match its dimensions");
  }
}

// Copies src into dst with its top-left corner at (x0, y0).
void blit(const Raster& src, Raster& dst, std::uint32_t x0, std::uint32_t y0) {
  const std::size_t row_bytes = std::size_t{src.width} * 3;
  for (std::uint32_t y = 0; y < src.height; ++y) {
    std::memcpy(&dst.pixels[(std::size_t{y0 + y} * dst.width + x0) * 3], &src.pixels[std::size_t{y} * row_bytes],
                row_bytes);
  }
}

Raster resized(const Raster& src, std::uint32_t width, std::uint32_t height) {
  if (src.width == width && src.height == height) return src;
  Raster out(width, height);
  kernels::resize_bilinear({src.pixels.data(), src.width, src.height, 3}, out.pixels.data(), width, height);
  return out;
}

}  // namespace

ComposedMosaic compose_mosaic(const Raster& pos, const Raster& neg, const ComposePolicy& policy) {
  check_raster(pos, "positive");
  check_raster(neg, "negative");

  if (policy.width_policy == WidthPolicy::resize_negative_to_positive_width) {
    const auto scaled_height = std::uint32_t(
        std::max<long long>(1, std::llround(double(neg.height) * double(pos.width) / double(neg.width))));
    const Raster bottom = resized(neg, pos.width, scaled_height);
    ComposedMosaic out{Raster(pos.width, pos.height + bottom.height, policy.background), pos.height};
    blit(pos, out.image, 0, 0);
    blit(bottom, out.image, 0, pos.height);
    return out;
  }

  const std::uint32_t width = std::max(pos.width, neg.width);
  ComposedMosaic out{Raster(width, pos.height + neg.height, policy.background), pos.height};
  blit(pos, out.image, (width - pos.width) / 2, 0);
  blit(neg, out.image, (width - neg.width) / 2, pos.height);
  return out;
}

std::string mosaic_filename(std::string_view pos_image_id, std::string_view neg_image_id) {
  return "mosaic_" + std::string(pos_image_id) + "__" + std::string(neg_image_id) + ".png";
}

std::uint32_t seam_row(std::uint32_t density_height, const std::optional<SeamGeometry>& geometry) {
  if (density_height < 2) {
    throw InputError("density map needs at least 2 rows to be split at a seam");
  }
  double exact = double(density_height) / 2.0;
  if (geometry) {
    if (geometry->boundary_row == 0 || geometry->boundary_row >= geometry->mosaic_height) {
      throw InputError("boundary row " + std::to_string(geometry->boundary_row) + " outside (0, " +
                       std::to_string(geometry->mosaic_height) + ")");
    }
    exact = double(geometry->boundary_row) * double(density_height) / double(geometry->mosaic_height);
  }
  const long long r = std::llround(exact);
  return std::uint32_t(std::clamp<long long>(r, 1, density_height - 1));
}

SplitCounts split_density_at(const DensityMap& d, std::uint32_t density_row) {
  for (float v : d.values) {
    if (!std::isfinite(v)) throw InputError("density map has a non-finite value");
  }
  const std::span<const float> all(d.values);
  const std::size_t cut = std::size_t{density_row} * d.width;
  const double top = kernels::pairwise_sum(all.first(cut));
  const double bottom = kernels::pairwise_sum(all.subspan(cut));
  return {std::max(0.0, top), std::max(0.0, bottom)};
}

SplitCounts split_density(const DensityMap& d, std::uint32_t boundary_row_image, std::uint32_t mosaic_height_image) {
  return split_density_at(d, seam_row(d.height, SeamGeometry{boundary_row_image, mosaic_height_image}));
}

}  // namespace countbench
