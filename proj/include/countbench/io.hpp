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

// File formats: manifest JSON, plan and prediction JSON Lines, density map
// files, metric reports and PNG images. Loaders reject malformed input with
// messages that carry the file and line (or byte offset) of the problem.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "countbench/core.hpp"
#include "countbench/metrics.hpp"
#include "countbench/mosaic.hpp"
#include "countbench/plan.hpp"

namespace countbench::io {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// --- raw files -------------------------------------------------------------

std::vector<std::uint8_t> read_bytes(const fs::path& path);
std::string read_text(const fs::path& path);
// Writes through a temporary sibling and renames it into place.
void write_bytes(const fs::path& path, std::span<const std::uint8_t> bytes);
void write_text(const fs::path& path, std::string_view text);

// --- manifest --------------------------------------------------------------

Json manifest_to_json(const Manifest& m);
// Schema check only; source names the origin in error messages.
Manifest manifest_from_json(const Json& j, const std::string& source);
// Parses and validates; any invariant violation is an InputError.
Manifest load_manifest(const fs::path& path);
void save_manifest(const Manifest& m, const fs::path& path);

// Builds a manifest from the FSC-147 release files: the point annotation
// JSON, the split JSON, and the tab-separated image-to-class list. The
// optional class-count file holds "image<TAB>n" lines for images showing more
// than one object class. Image paths are image_prefix / file name.
inline constexpr std::string_view kFsc147ConverterVersion = "fsc147-converter/1";
struct Fsc147Sources {
  fs::path annotations;
  fs::path splits;
  fs::path classes;
  std::optional<fs::path> class_counts;
  std::string split = "test";
  std::string image_prefix = "images_384_VarV2";
};
Manifest convert_fsc147(const Fsc147Sources& src);

// --- plans -----------------------------------------------------------------

std::string plan_to_jsonl(const Plan& plan);
Plan plan_from_jsonl(std::string_view text, const std::string& source);
Plan load_plan(const fs::path& path);
void save_plan(const Plan& plan, const fs::path& path);

// Seam geometry of a composed mosaic job: its boundary row and the height of
// the PNG at mosaic_path (resolved against plan_dir). Unset when the job has
// not been composed.
std::optional<SeamGeometry> mosaic_geometry(const MosaicJob& job, const fs::path& plan_dir);

// --- predictions -----------------------------------------------------------

std::string predictions_to_jsonl(std::span<const PredictionRecord> records);
std::vector<PredictionRecord> predictions_from_jsonl(std::string_view text, const std::string& source);
void save_predictions(std::span<const PredictionRecord> records, const fs::path& path);

struct LoadedPredictions {
  NegativeScoredSet negative;
  MosaicScoredSet mosaic;
  std::vector<std::string> unmatched;       // plan jobs without a record
  std::vector<std::string> orphans;         // records without a plan job
  std::vector<std::string> dropped_images;  // negative-test images lacking a positive or any negative
  std::uint64_t n_scored = 0;               // records joined to a job
};

// Joins prediction records to plan jobs. density_ref paths are relative to
// the prediction file; mosaic seams come from the plan (see mosaic_geometry).
// Duplicate records or unreadable density files are InputErrors.
LoadedPredictions load_predictions(const fs::path& path, const Plan& plan, const fs::path& plan_dir,
                                   const Manifest& m);

// Resolved per-job counts with ground truth, one JSON object per line. The
// drift command consumes these.
std::string scored_to_jsonl(const LoadedPredictions& p);
struct ScoredSets {
  NegativeScoredSet negative;
  MosaicScoredSet mosaic;
};
ScoredSets scored_from_jsonl(std::string_view text, const std::string& source);

// --- density maps ----------------------------------------------------------

// DMAP binary, or the CSV fallback when the file does not start with "DMAP".
DensityMap load_density(const fs::path& path);
// CSV when the extension is .csv, DMAP otherwise.
void save_density(const DensityMap& d, const fs::path& path);

// --- reports ---------------------------------------------------------------

enum class ReportFormat { json, csv, markdown };
ReportFormat parse_report_format(std::string_view text);

Json report_to_json(const MetricsReport& r);
MetricsReport report_from_json(const Json& j);

// One row per report. Table cells are rounded per column: two places for
// NMN, PCCN, MAE and RMSE, three for CntP, CntR and CntF1. JSON keeps full
// precision.
std::string format_report(std::span<const MetricsReport> reports, ReportFormat format);
void write_report(const MetricsReport& r, ReportFormat format, const fs::path& path);
MetricsReport read_report_json(const fs::path& path);

std::string drift_to_csv(const DriftSummary& d);

// --- images ----------------------------------------------------------------

Raster load_image(const fs::path& path);
std::vector<std::uint8_t> encode_png(const Raster& r);
void save_png(const Raster& r, const fs::path& path);
// Width and height from a PNG header without decoding pixels.
std::optional<std::pair<std::uint32_t, std::uint32_t>> png_size(const fs::path& path);

// Min-max normalized heat map under a fixed five-stop ramp
// (0,0,4) -> (87,16,110) -> (188,55,84) -> (249,142,9) -> (252,255,164),
// each cell drawn as a square block, with a strip below the map that prints
// the total count.
inline constexpr std::uint32_t kHeatmapBanner = 24;
Rgb heat_color(double t);
Raster render_heatmap_raster(const DensityMap& d);
std::uint32_t heatmap_block_size(const DensityMap& d);
void render_heatmap(const DensityMap& d, const fs::path& out_path);

Raster render_drift_boxplot(const DriftSummary& d);

}  // namespace countbench::io
