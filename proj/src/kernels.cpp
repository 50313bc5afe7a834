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

#include "countbench/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "countbench/errors.hpp"

namespace countbench::kernels {

void set_thread_count(unsigned n) {
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  omp_set_num_threads(int(n));
}

unsigned thread_count() { return unsigned(std::max(1, omp_get_max_threads())); }

unsigned resolve_thread_count(unsigned flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("PRACO_THREADS"); env != nullptr && *env != '\0') {
    const std::string_view text(env);
    unsigned n = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
    if (ec != std::errc{} || ptr != text.data() + text.size() || n == 0) {
      throw ConfigError("PRACO_THREADS must be a positive integer, got '" + std::string(text) + "'");
    }
    return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// ---------------------------------------------------------------------------
// Pairwise summation

namespace {

// Subtrees below this size are not worth a task.
constexpr std::size_t kTaskGrain = 1 << 15;

template <class T>
double sum_leaf(const T* p, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += double(p[i]);
  return s;
}

template <class T>
double sum_tree(const T* p, std::size_t n) {
  if (n <= kLeaf) return sum_leaf(p, n);
  const std::size_t half = n / 2;
  return sum_tree(p, half) + sum_tree(p + half, n - half);
}

template <class T>
double sum_tree_tasks(const T* p, std::size_t n) {
  if (n <= kTaskGrain) return sum_tree(p, n);
  const std::size_t half = n / 2;
  double left = 0.0;
  double right = 0.0;
#pragma omp task shared(left) firstprivate(p, half)
  left = sum_tree_tasks(p, half);
  right = sum_tree_tasks(p + half, n - half);
#pragma omp taskwait
  return left + right;
}

template <class T>
double sum_parallel(std::span<const T> xs) {
  if (xs.size() <= kTaskGrain || thread_count() == 1) return sum_tree(xs.data(), xs.size());
  double total = 0.0;
#pragma omp parallel
#pragma omp single
  total = sum_tree_tasks(xs.data(), xs.size());
  return total;
}

}  // namespace

double pairwise_sum(std::span<const double> xs) { return sum_parallel(xs); }
double pairwise_sum_serial(std::span<const double> xs) { return sum_tree(xs.data(), xs.size()); }
double pairwise_sum(std::span<const float> xs) { return sum_parallel(xs); }
double pairwise_sum_serial(std::span<const float> xs) { return sum_tree(xs.data(), xs.size()); }

// ---------------------------------------------------------------------------
// Mosaic terms

namespace {

inline void mosaic_term(double c_pos, double c_neg, double gt, double& p, double& r, double& f1) {
  const double tp = std::min(c_pos, gt);
  const double predicted = c_pos + c_neg;
  p = predicted == 0.0 ? 1.0 : tp / predicted;
  r = tp / gt;
  const double pr = p + r;
  f1 = pr == 0.0 ? 0.0 : 2.0 * p * r / pr;
}

}  // namespace

void mosaic_terms(const MosaicTermsIn& in, const MosaicTermsOut& out) {
  const auto n = std::ptrdiff_t(in.c_pos.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    mosaic_term(in.c_pos[i], in.c_neg[i], in.gt[i], out.precision[i], out.recall[i], out.f1[i]);
  }
}

void mosaic_terms_serial(const MosaicTermsIn& in, const MosaicTermsOut& out) {
  for (std::size_t i = 0; i < in.c_pos.size(); ++i) {
    mosaic_term(in.c_pos[i], in.c_neg[i], in.gt[i], out.precision[i], out.recall[i], out.f1[i]);
  }
}

// ---------------------------------------------------------------------------
// Gaussian splatting

namespace {

struct Window {
  std::int64_t row0, row1, col0, col1;  // inclusive
  std::int64_t cell_row, cell_col;
};

inline Window window_of(double x, double y, std::int64_t radius, std::uint32_t height, std::uint32_t width) {
  const auto cx = std::int64_t(std::floor(x));
  const auto cy = std::int64_t(std::floor(y));
  return {std::max<std::int64_t>(0, cy - radius), std::min<std::int64_t>(height - 1, cy + radius),
          std::max<std::int64_t>(0, cx - radius), std::min<std::int64_t>(width - 1, cx + radius), cy, cx};
}

// Kernel weight of a cell, zero beyond the truncation radius. The cell that
// contains the point always gets weight so tiny sigmas keep unit mass.
inline double cell_weight(std::int64_t row, std::int64_t col, double x, double y, double inv_two_var,
                          double cutoff_sq, const Window& w) {
  const double dx = double(col) + 0.5 - x;
  const double dy = double(row) + 0.5 - y;
  const double d2 = dx * dx + dy * dy;
  if (d2 > cutoff_sq && !(row == w.cell_row && col == w.cell_col)) return 0.0;
  return std::exp(-d2 * inv_two_var);
}

inline double window_mass(double x, double y, double inv_two_var, double cutoff_sq, const Window& w) {
  double z = 0.0;
  for (std::int64_t r = w.row0; r <= w.row1; ++r) {
    for (std::int64_t c = w.col0; c <= w.col1; ++c) z += cell_weight(r, c, x, y, inv_two_var, cutoff_sq, w);
  }
  return z;
}

struct GaussianParams {
  std::int64_t radius;
  double inv_two_var;
  double cutoff_sq;

  explicit GaussianParams(double sigma)
      : radius(std::int64_t(std::ceil(4.0 * sigma))),
        inv_two_var(1.0 / (2.0 * sigma * sigma)),
        cutoff_sq(16.0 * sigma * sigma) {}
};

}  // namespace

void splat_gaussian_serial(std::span<const double> xy, double sigma, std::uint32_t height, std::uint32_t width,
                           std::span<double> acc) {
  const GaussianParams g(sigma);
  const std::size_t n = xy.size() / 2;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = xy[2 * i];
    const double y = xy[2 * i + 1];
    const Window w = window_of(x, y, g.radius, height, width);
    const double z = window_mass(x, y, g.inv_two_var, g.cutoff_sq, w);
    for (std::int64_t r = w.row0; r <= w.row1; ++r) {
      for (std::int64_t c = w.col0; c <= w.col1; ++c) {
        acc[std::size_t(r) * width + std::size_t(c)] += cell_weight(r, c, x, y, g.inv_two_var, g.cutoff_sq, w) / z;
      }
    }
  }
}

void splat_gaussian(std::span<const double> xy, double sigma, std::uint32_t height, std::uint32_t width,
                    std::span<double> acc) {
  const GaussianParams g(sigma);
  const auto n = std::ptrdiff_t(xy.size() / 2);
  std::vector<double> mass(static_cast<std::size_t>(n));
  std::vector<Window> windows(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double x = xy[2 * i];
    const double y = xy[2 * i + 1];
    windows[i] = window_of(x, y, g.radius, height, width);
    mass[i] = window_mass(x, y, g.inv_two_var, g.cutoff_sq, windows[i]);
  }
  // Each row is owned by one thread and receives points in input order.
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t r = 0; r < std::int64_t(height); ++r) {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const Window& w = windows[i];
      if (r < w.row0 || r > w.row1) continue;
      const double x = xy[2 * i];
      const double y = xy[2 * i + 1];
      for (std::int64_t c = w.col0; c <= w.col1; ++c) {
        acc[std::size_t(r) * width + std::size_t(c)] +=
            cell_weight(r, c, x, y, g.inv_two_var, g.cutoff_sq, w) / mass[i];
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Bilinear resampling

namespace {

struct Tap {
  std::uint32_t i0, i1;
  double frac;
};

inline Tap tap_of(std::uint32_t dst_index, std::uint32_t src_size, std::uint32_t dst_size) {
  double s = (double(dst_index) + 0.5) * double(src_size) / double(dst_size) - 0.5;
  s = std::clamp(s, 0.0, double(src_size - 1));
  const auto i0 = std::uint32_t(s);
  const std::uint32_t i1 = std::min(i0 + 1, src_size - 1);
  return {i0, i1, s - double(i0)};
}

inline void resize_row(const ImageView& src, std::uint8_t* dst, std::uint32_t dst_width, std::uint32_t dst_height,
                       std::uint32_t y) {
  const Tap ty = tap_of(y, src.height, dst_height);
  const std::uint32_t ch = src.channels;
  const std::uint8_t* row0 = src.data + std::size_t(ty.i0) * src.width * ch;
  const std::uint8_t* row1 = src.data + std::size_t(ty.i1) * src.width * ch;
  std::uint8_t* out = dst + std::size_t(y) * dst_width * ch;
  for (std::uint32_t x = 0; x < dst_width; ++x) {
    const Tap tx = tap_of(x, src.width, dst_width);
    for (std::uint32_t k = 0; k < ch; ++k) {
      const double top = (1.0 - tx.frac) * row0[tx.i0 * ch + k] + tx.frac * row0[tx.i1 * ch + k];
      const double bottom = (1.0 - tx.frac) * row1[tx.i0 * ch + k] + tx.frac * row1[tx.i1 * ch + k];
      const double v = (1.0 - ty.frac) * top + ty.frac * bottom;
      out[std::size_t(x) * ch + k] = std::uint8_t(std::clamp(std::lround(v), 0L, 255L));
    }
  }
}

}  // namespace

void resize_bilinear(const ImageView& src, std::uint8_t* dst, std::uint32_t dst_width, std::uint32_t dst_height) {
#pragma omp parallel for schedule(static)
  for (std::int64_t y = 0; y < std::int64_t(dst_height); ++y) {
    resize_row(src, dst, dst_width, dst_height, std::uint32_t(y));
  }
}

void resize_bilinear_serial(const ImageView& src, std::uint8_t* dst, std::uint32_t dst_width,
                            std::uint32_t dst_height) {
  for (std::uint32_t y = 0; y < dst_height; ++y) resize_row(src, dst, dst_width, dst_height, y);
}

}  // namespace countbench::kernels
