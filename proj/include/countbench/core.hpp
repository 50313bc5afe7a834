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
#include <unordered_map>
#include <variant>
#include <vector>

namespace countbench {

struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

// One image of a single-class-per-image dataset.
struct ManifestEntry {
  std::string image_id;
  std::string image_path;  // relative to the manifest file
  std::string class_name;
  std::uint64_t gt_count = 0;
  std::optional<std::vector<Point>> points;
  std::uint32_t class_count_in_image = 1;

  bool operator==(const ManifestEntry&) const = default;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  std::string split_name;
  std::string source_note;

  bool operator==(const Manifest&) const = default;
};

// Returns one human-readable line per broken invariant; empty means valid.
std::vector<std::string> validate_manifest(const Manifest& m);

// Lookup of entries by image_id. Throws InputError on duplicate ids.
class ManifestIndex {
 public:
  explicit ManifestIndex(const Manifest& m);

  const ManifestEntry* find(std::string_view image_id) const;
  const ManifestEntry& at(std::string_view image_id) const;
  std::size_t size() const noexcept { return by_id_.size(); }

 private:
  const Manifest* manifest_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

// Real-valued count grid, row-major, top row first. Stored as binary32 to
// match the on-disk DMAP payload exactly.
struct DensityMap {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<float> values;

  DensityMap() = default;
  DensityMap(std::uint32_t h, std::uint32_t w) : height(h), width(w), values(std::size_t{h} * w, 0.0f) {}

  float& at(std::uint32_t row, std::uint32_t col) { return values[std::size_t{row} * width + col]; }
  float at(std::uint32_t row, std::uint32_t col) const { return values[std::size_t{row} * width + col]; }

  bool operator==(const DensityMap&) const = default;
};

enum class TestKind { negative, mosaic };

std::string_view to_string(TestKind kind);

struct NegativeJob {
  std::string image_id;
  std::string prompt_class;
  bool is_positive = false;

  bool operator==(const NegativeJob&) const = default;
};

struct MosaicJob {
  std::string pos_image_id;
  std::string neg_image_id;
  std::string prompt_class;
  std::optional<std::string> mosaic_path;    // relative to the plan file
  std::optional<std::uint32_t> boundary_row;  // first row of the negative image

  bool operator==(const MosaicJob&) const = default;
};

struct NegativeKey {
  std::string image_id;
  std::string prompt_class;

  bool operator==(const NegativeKey&) const = default;
  auto operator<=>(const NegativeKey&) const = default;
};

struct MosaicKey {
  std::string pos_image_id;
  std::string neg_image_id;
  std::string prompt_class;

  bool operator==(const MosaicKey&) const = default;
  auto operator<=>(const MosaicKey&) const = default;
};

using JobKey = std::variant<NegativeKey, MosaicKey>;

NegativeKey key_of(const NegativeJob& job);
MosaicKey key_of(const MosaicJob& job);
std::string describe(const JobKey& key);

// One model answer for a plan job. Exactly one output form is populated:
// a count (negative test), a (c_pos, c_neg) pair (mosaic test), or a
// reference to a density map file (either test).
class PredictionRecord {
 public:
  PredictionRecord(JobKey key, std::optional<double> count, std::optional<double> c_pos,
                   std::optional<double> c_neg, std::optional<std::string> density_ref);

  static PredictionRecord with_count(NegativeKey key, double count);
  static PredictionRecord with_split(MosaicKey key, double c_pos, double c_neg);
  static PredictionRecord with_density(JobKey key, std::string density_ref);

  const JobKey& key() const noexcept { return key_; }
  TestKind test() const noexcept;
  const std::optional<double>& count() const noexcept { return count_; }
  const std::optional<double>& c_pos() const noexcept { return c_pos_; }
  const std::optional<double>& c_neg() const noexcept { return c_neg_; }
  const std::optional<std::string>& density_ref() const noexcept { return density_ref_; }

  bool operator==(const PredictionRecord&) const = default;

 private:
  JobKey key_;
  std::optional<double> count_;
  std::optional<double> c_pos_;
  std::optional<double> c_neg_;
  std::optional<std::string> density_ref_;
};

struct DriftOutlier {
  std::string pos_image_id;
  std::string neg_image_id;
  double value = 0.0;

  bool operator==(const DriftOutlier&) const = default;
};

struct SkippedPair {
  std::string pos_image_id;
  std::string neg_image_id;

  bool operator==(const SkippedPair&) const = default;
};

// Box-plot summary of correct-count drift values. Quartiles use linear
// interpolation between order statistics; whiskers sit at 1.5 IQR beyond the
// quartiles, clipped to the observed range.
struct DriftSummary {
  std::uint64_t n = 0;
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double whisker_low = 0.0;
  double whisker_high = 0.0;
  std::vector<DriftOutlier> outliers;
  std::vector<SkippedPair> skipped;  // pairs whose reference count c_ii is 0 or missing

  bool operator==(const DriftSummary&) const = default;
};

// One evaluated model. Metrics of a test that was not run stay unset.
struct MetricsReport {
  std::string model = "model";
  std::optional<double> nmn;
  std::optional<double> pccn;  // percent
  std::optional<double> cnt_p;
  std::optional<double> cnt_r;
  std::optional<double> cnt_f1;            // mean of per-mosaic F1
  std::optional<double> cnt_f1_aggregate;  // harmonic mean of cnt_p and cnt_r
  std::optional<double> mae;
  std::optional<double> rmse;
  std::optional<DriftSummary> drift;
  std::uint64_t n_images = 0;
  std::uint64_t n_jobs_scored = 0;
  std::uint64_t unmatched = 0;
  std::uint64_t orphans = 0;
  std::string config_fingerprint;
  std::vector<std::string> notes;

  bool operator==(const MetricsReport&) const = default;
};

}  // namespace countbench
