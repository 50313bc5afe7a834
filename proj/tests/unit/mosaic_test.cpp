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

#include <gtest/gtest.h>

#include "countbench/density.hpp"
#include "countbench/errors.hpp"
#include "countbench/mosaic.hpp"
#include "countbench/rng.hpp"
#include "fixtures.hpp"

namespace countbench {
namespace {

using testing::pattern_image;

ComposePolicy policy(WidthPolicy w) {
  ComposePolicy p;
  p.width_policy = w;
  return p;
}

constexpr WidthPolicy kPolicies[] = {WidthPolicy::resize_negative_to_positive_width, WidthPolicy::pad_to_max_width};

DensityMap fixture_4x2() {
  DensityMap d(4, 2);
  d.values = {1, 1, 2, 0, 0, 3, 4, 0};
  return d;
}

bool region_equals(const Raster& big, std::uint32_t x0, std::uint32_t y0, const Raster& small) {
  for (std::uint32_t y = 0; y < small.height; ++y) {
    for (std::uint32_t x = 0; x < small.width; ++x) {
      if (big.at(x0 + x, y0 + y) != small.at(x, y)) return false;
    }
  }
  return true;
}

TEST(ComposeMosaic, EqualWidthsStackUnderEitherPolicy) {
  const Raster pos = pattern_image(80, 100, 1), neg = pattern_image(80, 50, 2);
  for (WidthPolicy w : kPolicies) {
    const ComposedMosaic c = compose_mosaic(pos, neg, policy(w));
    EXPECT_EQ(c.image.width, 80u);
    EXPECT_EQ(c.image.height, 150u);
    EXPECT_EQ(c.boundary_row, 100u);
    EXPECT_TRUE(region_equals(c.image, 0, 0, pos));
    EXPECT_TRUE(region_equals(c.image, 0, 100, neg));
  }
}

TEST(ComposeMosaic, ResizePolicyScalesNegativeProportionally) {
  const Raster pos = pattern_image(80, 100, 1), neg = pattern_image(160, 50, 2);
  const ComposedMosaic c = compose_mosaic(pos, neg, policy(WidthPolicy::resize_negative_to_positive_width));
  EXPECT_EQ(c.image.width, 80u);
  EXPECT_EQ(c.image.height, 125u);
  EXPECT_EQ(c.boundary_row, 100u);
  EXPECT_TRUE(region_equals(c.image, 0, 0, pos));
}

TEST(ComposeMosaic, PadPolicyCentersTheNarrowerImage) {
  const Raster pos = pattern_image(80, 100, 1), neg = pattern_image(160, 50, 2);
  ComposePolicy p = policy(WidthPolicy::pad_to_max_width);
  p.background = {9, 8, 7};
  const ComposedMosaic c = compose_mosaic(pos, neg, p);
  EXPECT_EQ(c.image.width, 160u);
  EXPECT_EQ(c.image.height, 150u);
  EXPECT_EQ(c.boundary_row, 100u);
  EXPECT_TRUE(region_equals(c.image, 40, 0, pos));
  EXPECT_TRUE(region_equals(c.image, 0, 100, neg));
  EXPECT_EQ(c.image.at(0, 0), (Rgb{9, 8, 7}));
  EXPECT_EQ(c.image.at(159, 99), (Rgb{9, 8, 7}));
}

TEST(ComposeMosaic, TinyNegativeKeepsAtLeastOneRow) {
  const ComposedMosaic c = compose_mosaic(pattern_image(10, 5, 1), pattern_image(100, 1, 2),
                                          policy(WidthPolicy::resize_negative_to_positive_width));
  EXPECT_EQ(c.image.height, 6u);
}

TEST(ComposeMosaic, IsDeterministic) {
  const Raster pos = pattern_image(33, 21, 4), neg = pattern_image(70, 45, 5);
  for (WidthPolicy w : kPolicies) EXPECT_EQ(compose_mosaic(pos, neg, policy(w)).image, compose_mosaic(pos, neg, policy(w)).image);
}

TEST(ComposeMosaic, RejectsZeroAreaImages) {
  EXPECT_THROW(compose_mosaic(Raster(0, 5), pattern_image(3, 3, 0), {}), InputError);
  EXPECT_THROW(compose_mosaic(pattern_image(3, 3, 0), Raster(4, 0), {}), InputError);
}

TEST(ComposeMosaic, PolicyNamesParse) {
  EXPECT_EQ(parse_width_policy("resize_negative_to_positive_width"), WidthPolicy::resize_negative_to_positive_width);
  EXPECT_EQ(parse_width_policy("pad_to_max_width"), WidthPolicy::pad_to_max_width);
  EXPECT_THROW(parse_width_policy("stretch"), ConfigError);
  EXPECT_EQ(mosaic_filename("p1", "n2"), "mosaic_p1__n2.png");
}

TEST(SplitDensity, FixtureSplitsAtImageRowTwo) {
  const SplitCounts s = split_density(fixture_4x2(), 2, 4);
  EXPECT_EQ(s.c_pos, 4.0);
  EXPECT_EQ(s.c_neg, 7.0);
}

TEST(SplitDensity, ZeroMapSplitsToZero) {
  const SplitCounts s = split_density(DensityMap(6, 3), 1, 2);
  EXPECT_EQ(s.c_pos, 0.0);
  EXPECT_EQ(s.c_neg, 0.0);
}

TEST(SeamRow, ScalesProportionallyAndClamps) {
  EXPECT_EQ(seam_row(8, SeamGeometry{2, 4}), 4u);
  EXPECT_EQ(seam_row(8, SeamGeometry{1, 1000}), 1u);
  EXPECT_EQ(seam_row(8, SeamGeometry{999, 1000}), 7u);
  EXPECT_EQ(seam_row(9, std::nullopt), 5u);  // 4.5 rounds away from zero
  EXPECT_EQ(seam_row(2, std::nullopt), 1u);
  EXPECT_THROW(seam_row(1, std::nullopt), InputError);
  EXPECT_THROW(seam_row(8, SeamGeometry{0, 4}), InputError);
  EXPECT_THROW(seam_row(8, SeamGeometry{4, 4}), InputError);
}

TEST(SplitDensity, EachHalfIsClampedSeparately) {
  DensityMap d(2, 1);
  d.values = {-3.0f, 5.0f};
  const SplitCounts s = split_density_at(d, 1);
  EXPECT_EQ(s.c_pos, 0.0);
  EXPECT_EQ(s.c_neg, 5.0);
}

TEST(SplitDensity, NonnegativeMapsConserveMass) {
  CounterRng r(66);
  for (int trial = 0; trial < 100; ++trial) {
    DensityMap d(2 + std::uint32_t(r.below(30)), 1 + std::uint32_t(r.below(30)));
    // Dyadic values keep every partial sum exact.
    for (auto& v : d.values) v = float(r.below(64)) / 16.0f;
    const std::uint32_t row = 1 + std::uint32_t(r.below(d.height - 1));
    const SplitCounts s = split_density_at(d, row);
    EXPECT_EQ(s.c_pos + s.c_neg, sum_count(d));
  }
}

TEST(SplitDensity, SwappingRowBlocksSwapsCounts) {
  CounterRng r(67);
  for (int trial = 0; trial < 100; ++trial) {
    const std::uint32_t top = 1 + std::uint32_t(r.below(10)), bottom = 1 + std::uint32_t(r.below(10));
    const std::uint32_t w = 1 + std::uint32_t(r.below(8));
    DensityMap d(top + bottom, w);
    for (auto& v : d.values) v = float(r.uniform() * 4 - 1);
    DensityMap swapped(top + bottom, w);
    std::copy(d.values.begin() + std::ptrdiff_t(top * w), d.values.end(), swapped.values.begin());
    std::copy(d.values.begin(), d.values.begin() + std::ptrdiff_t(top * w), swapped.values.begin() + std::ptrdiff_t(bottom * w));
    const SplitCounts a = split_density_at(d, top);
    const SplitCounts b = split_density_at(swapped, bottom);
    EXPECT_EQ(a.c_pos, b.c_neg);
    EXPECT_EQ(a.c_neg, b.c_pos);
  }
}

}  // namespace
}  // namespace countbench
