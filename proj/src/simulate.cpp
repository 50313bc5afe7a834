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

#include "countbench/simulate.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>

#include "countbench/density.hpp"
#include "countbench/errors.hpp"
#include "countbench/rng.hpp"

namespace countbench {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double parse_number(std::string_view text, std::string_view what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ConfigError("bad " + std::string(what) + " '" + std::string(text) + "' in model spec");
  }
  return v;
}

std::vector<std::string_view> split_colon(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    const std::size_t sep = text.find(':', pos);
    parts.push_back(text.substr(pos, sep == std::string_view::npos ? std::string_view::npos : sep - pos));
    if (sep == std::string_view::npos) break;
    pos = sep + 1;
  }
  return parts;
}

void validate(const SyntheticKind& kind) {
  std::visit(overloaded{
                 [](const ConstantModel& c) {
                   if (!(c.k >= 0.0) || !std::isfinite(c.k)) throw ConfigError("constant model needs k >= 0");
                 },
                 [](const NoisyPerfectModel& n) {
                   if (!(n.sigma >= 0.0) || !std::isfinite(n.sigma)) {
                     throw ConfigError("noisy_perfect model needs sigma >= 0");
                   }
                 },
                 [](const ClassConfuserModel& c) {
                   if (!(c.leak >= 0.0 && c.leak <= 1.0)) throw ConfigError("class_confuser leak must be in [0, 1]");
                 },
                 [](const auto&) {},
             },
             kind);
}

struct Outputs {
  double first = 0.0;   // count, or c_pos
  double second = 0.0;  // c_neg (mosaic only)
};

double noisy(double base, CounterRng& rng, double sigma) { return std::max(0.0, base + sigma * rng.normal()); }

Outputs negative_outputs(const SyntheticKind& kind, const NegativeJob& job, double gt) {
  return std::visit(overloaded{
                        [&](const PerfectModel&) { return Outputs{job.is_positive ? gt : 0.0}; },
                        [&](const PromptBlindModel&) { return Outputs{gt}; },
                        [&](const ConstantModel& c) { return Outputs{c.k}; },
                        [&](const NoisyPerfectModel& n) {
                          auto rng = CounterRng::keyed(n.seed, "noise", describe(key_of(job)));
                          return Outputs{noisy(job.is_positive ? gt : 0.0, rng, n.sigma)};
                        },
                        [&](const ClassConfuserModel& c) { return Outputs{job.is_positive ? gt : c.leak * gt}; },
                    },
                    kind);
}

Outputs mosaic_outputs(const SyntheticKind& kind, const MosaicJob& job, double gt_pos, double gt_neg) {
  return std::visit(overloaded{
                        [&](const PerfectModel&) { return Outputs{gt_pos, 0.0}; },
                        [&](const PromptBlindModel&) { return Outputs{gt_pos, gt_neg}; },
                        [&](const ConstantModel& c) { return Outputs{c.k, c.k}; },
                        [&](const NoisyPerfectModel& n) {
                          auto rng = CounterRng::keyed(n.seed, "noise", describe(key_of(job)));
                          const double top = noisy(gt_pos, rng, n.sigma);
                          return Outputs{top, noisy(0.0, rng, n.sigma)};
                        },
                        [&](const ClassConfuserModel& c) { return Outputs{gt_pos, c.leak * gt_neg}; },
                    },
                    kind);
}

// Places `count` mass in rows [row0, row1): floor(count) unit dots at
// uniform positions, the remainder in one uniformly chosen cell.
void place_mass(double count, std::uint32_t row0, std::uint32_t row1, std::uint32_t width, CounterRng& rng,
                std::vector<Point>& points, std::vector<std::pair<std::size_t, double>>& fractions) {
  const double whole = std::floor(count);
  const auto n = std::uint64_t(whole);
  const double rows = double(row1 - row0);
  const double max_x = std::nextafter(double(width), 0.0);
  const double max_y = std::nextafter(double(row1), 0.0);
  for (std::uint64_t i = 0; i < n; ++i) {
    const double x = std::min(rng.uniform() * double(width), max_x);
    const double y = std::min(double(row0) + rng.uniform() * rows, max_y);
    points.push_back({x, y});
  }
  const double rest = count - whole;
  if (rest > 0.0) {
    const std::uint64_t cells = std::uint64_t(row1 - row0) * width;
    const std::uint64_t cell = rng.below(cells);
    fractions.emplace_back(std::size_t{row0} * width + std::size_t(cell), rest);
  }
}

DensityMap render_counts(const DensityEmission& e, std::string_view key, std::uint32_t seam, double top,
                         double bottom, bool split) {
  auto rng = CounterRng::keyed(0x5eedc0de, "placement", key);
  std::vector<Point> points;
  std::vector<std::pair<std::size_t, double>> fractions;
  if (split) {
    place_mass(top, 0, seam, e.width, rng, points, fractions);
    place_mass(bottom, seam, e.height, e.width, rng, points, fractions);
  } else {
    place_mass(top, 0, e.height, e.width, rng, points, fractions);
  }
  DensityMap d = render_from_points(points, e.height, e.width, UnitDot{});
  for (const auto& [cell, mass] : fractions) d.values[cell] = float(double(d.values[cell]) + mass);
  return d;
}

std::string density_ref(std::string_view dir, TestKind test, std::size_t index) {
  char name[48];
  std::snprintf(name, sizeof name, "%s_%08zu.dmap", test == TestKind::negative ? "neg" : "mos", index);
  return dir.empty() ? std::string(name) : std::string(dir) + "/" + name;
}

}  // namespace

SyntheticKind parse_synthetic_kind(std::string_view text) {
  const auto parts = split_colon(text);
  const std::string_view name = parts[0];
  auto expect_args = [&](std::size_t lo, std::size_t hi) {
    if (parts.size() - 1 < lo || parts.size() - 1 > hi) {
      throw ConfigError("model spec '" + std::string(text) + "' has the wrong number of parameters");
    }
  };
  SyntheticKind kind;
  if (name == "perfect") {
    expect_args(0, 0);
    kind = PerfectModel{};
  } else if (name == "prompt_blind") {
    expect_args(0, 0);
    kind = PromptBlindModel{};
  } else if (name == "constant") {
    expect_args(1, 1);
    kind = ConstantModel{parse_number(parts[1], "k")};
  } else if (name == "noisy_perfect") {
    expect_args(1, 2);
    NoisyPerfectModel n{parse_number(parts[1], "sigma"), 0};
    if (parts.size() == 3) {
      auto [ptr, ec] = std::from_chars(parts[2].data(), parts[2].data() + parts[2].size(), n.seed);
      if (parts[2].empty() || ec != std::errc{} || ptr != parts[2].data() + parts[2].size()) {
        throw ConfigError("bad seed '" + std::string(parts[2]) + "' in model spec");
      }
    }
    kind = n;
  } else if (name == "class_confuser") {
    expect_args(1, 1);
    kind = ClassConfuserModel{parse_number(parts[1], "leak")};
  } else {
    throw ConfigError("unknown synthetic model '" + std::string(name) + "'");
  }
  validate(kind);
  return kind;
}

std::string to_string(const SyntheticKind& kind) {
  char buf[96];
  std::visit(overloaded{
                 [&](const PerfectModel&) { std::snprintf(buf, sizeof buf, "perfect"); },
                 [&](const PromptBlindModel&) { std::snprintf(buf, sizeof buf, "prompt_blind"); },
                 [&](const ConstantModel& c) { std::snprintf(buf, sizeof buf, "constant:%.17g", c.k); },
                 [&](const NoisyPerfectModel& n) {
                   std::snprintf(buf, sizeof buf, "noisy_perfect:%.17g:%llu", n.sigma,
                                 static_cast<unsigned long long>(n.seed));
                 },
                 [&](const ClassConfuserModel& c) { std::snprintf(buf, sizeof buf, "class_confuser:%.17g", c.leak); },
             },
             kind);
  return buf;
}

SyntheticRun run_synthetic(const SyntheticModelSpec& spec, const Plan& plan, const Manifest& m,
                           std::span<const std::optional<SeamGeometry>> mosaic_geometry,
                           std::string_view density_dir) {
  validate(spec.kind);
  const auto* density = std::get_if<DensityEmission>(&spec.emit);
  if (density != nullptr && (density->height < 2 || density->width == 0)) {
    throw ConfigError("density emission needs at least 2 rows and 1 column");
  }
  if (!mosaic_geometry.empty() && mosaic_geometry.size() != plan.mosaic.size()) {
    throw InputError("mosaic geometry does not match the plan");
  }

  const ManifestIndex index(m);
  // Resolve and check every job before the parallel region.
  std::vector<double> gt_first, gt_second;
  for (const NegativeJob& job : plan.negative) {
    const ManifestEntry* e = index.find(job.image_id);
    if (e == nullptr) throw InputError("plan references unknown image " + job.image_id);
    if (job.is_positive != (job.prompt_class == e->class_name)) {
      throw InputError("plan job " + describe(key_of(job)) + " disagrees with the manifest on positivity");
    }
    gt_first.push_back(double(e->gt_count));
  }
  for (const MosaicJob& job : plan.mosaic) {
    const ManifestEntry* pos = index.find(job.pos_image_id);
    const ManifestEntry* neg = index.find(job.neg_image_id);
    if (pos == nullptr || neg == nullptr) throw InputError("plan job " + describe(key_of(job)) + " references an unknown image");
    if (job.prompt_class != pos->class_name) {
      throw InputError("plan job " + describe(key_of(job)) + " prompt does not match the positive image class");
    }
    gt_first.push_back(double(pos->gt_count));
    gt_second.push_back(double(neg->gt_count));
  }

  const std::size_t n_neg = plan.negative.size();
  const std::size_t n_total = plan.size();
  std::vector<std::optional<PredictionRecord>> records(n_total);
  std::vector<DensityMap> maps(density != nullptr ? n_total : 0);
  std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t t = 0; t < std::ptrdiff_t(n_total); ++t) {
    try {
      const auto i = std::size_t(t);
      if (i < n_neg) {
        const NegativeJob& job = plan.negative[i];
        const Outputs out = negative_outputs(spec.kind, job, gt_first[i]);
        if (density != nullptr) {
          maps[i] = render_counts(*density, describe(key_of(job)), 0, out.first, 0.0, false);
          records[i] = PredictionRecord::with_density(key_of(job), density_ref(density_dir, TestKind::negative, i));
        } else {
          records[i] = PredictionRecord::with_count(key_of(job), out.first);
        }
      } else {
        const std::size_t k = i - n_neg;
        const MosaicJob& job = plan.mosaic[k];
        const Outputs out = mosaic_outputs(spec.kind, job, gt_first[i], gt_second[k]);
        if (density != nullptr) {
          const auto geometry = mosaic_geometry.empty() ? std::nullopt : mosaic_geometry[k];
          const std::uint32_t seam = seam_row(density->height, geometry);
          maps[i] = render_counts(*density, describe(key_of(job)), seam, out.first, out.second, true);
          records[i] = PredictionRecord::with_density(key_of(job), density_ref(density_dir, TestKind::mosaic, k));
        } else {
          records[i] = PredictionRecord::with_split(key_of(job), out.first, out.second);
        }
      }
    } catch (...) {
#pragma omp critical(countbench_simulate_error)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  SyntheticRun run;
  run.records.reserve(n_total);
  for (auto& r : records) run.records.push_back(std::move(*r));
  run.maps = std::move(maps);
  return run;
}

}  // namespace countbench
