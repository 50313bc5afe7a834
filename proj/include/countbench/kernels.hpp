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

// Data-parallel inner loops. Every kernel has an OpenMP version and a serial
// reference with the same floating-point evaluation order, so the two agree
// bit for bit and results never depend on the thread count.

#include <cstddef>
#include <cstdint>
#include <span>

namespace countbench::kernels {

// Threads used by OpenMP regions; n == 0 selects available parallelism.
void set_thread_count(unsigned n);
unsigned thread_count();

// Thread count from an explicit flag, else the PRACO_THREADS environment
// variable, else available parallelism. Throws ConfigError on garbage.
unsigned resolve_thread_count(unsigned flag_value);

// Pairwise (cascade) summation. Leaves of at most kLeaf elements are summed
// left to right; the tree splits at n / 2 regardless of thread count.
inline constexpr std::size_t kLeaf = 128;

double pairwise_sum(std::span<const double> xs);
double pairwise_sum_serial(std::span<const double> xs);
double pairwise_sum(std::span<const float> xs);
double pairwise_sum_serial(std::span<const float> xs);

// Per-mosaic counting precision, recall and F1 terms.
struct MosaicTermsIn {
  std::span<const double> c_pos;
  std::span<const double> c_neg;
  std::span<const double> gt;
};
struct MosaicTermsOut {
  std::span<double> precision;
  std::span<double> recall;
  std::span<double> f1;
};
void mosaic_terms(const MosaicTermsIn& in, const MosaicTermsOut& out);
void mosaic_terms_serial(const MosaicTermsIn& in, const MosaicTermsOut& out);

// Adds a unit-mass truncated Gaussian for every point into a height x width
// accumulator. Points are (x, y) pairs in pixel units.
void splat_gaussian(std::span<const double> xy, double sigma, std::uint32_t height, std::uint32_t width,
                    std::span<double> acc);
void splat_gaussian_serial(std::span<const double> xy, double sigma, std::uint32_t height, std::uint32_t width,
                           std::span<double> acc);

// Bilinear resampling of interleaved 8-bit images, pixel-center aligned.
struct ImageView {
  const std::uint8_t* data;
  std::uint32_t width;
  std::uint32_t height;
  std::uint32_t channels;
};
void resize_bilinear(const ImageView& src, std::uint8_t* dst, std::uint32_t dst_width, std::uint32_t dst_height);
void resize_bilinear_serial(const ImageView& src, std::uint8_t* dst, std::uint32_t dst_width,
                            std::uint32_t dst_height);

}  // namespace countbench::kernels
