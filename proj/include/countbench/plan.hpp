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
#include <vector>

#include "countbench/core.hpp"

namespace countbench {

enum class PlanMode { full, sampled };

struct PlanConfig {
  PlanMode mode = PlanMode::full;
  std::uint32_t negatives_per_image = 0;  // sampled mode only
  std::uint64_t seed = 0;
  bool dedupe_prompts_by_class = true;
};

// Keeps entries with class_count_in_image <= max_classes, in order.
Manifest filter_manifest(const Manifest& m, std::uint32_t max_classes);

// Negative-label test jobs, sorted by (image_id, prompt_class). Prompts equal
// to the image's own class are positive. Job keys are unique, so prompts drawn
// from several same-class images collapse into one job.
std::vector<NegativeJob> build_negative_plan(const Manifest& m, const PlanConfig& cfg);

// Ordered (positive, negative) image pairs with differing classes, sorted by
// (pos_image_id, neg_image_id). mosaic_path and boundary_row are left unset
// until composition.
std::vector<MosaicJob> build_mosaic_plan(const Manifest& m, const PlanConfig& cfg);

// A plan file holds jobs of a single test.
struct Plan {
  std::optional<TestKind> test;  // unset for an empty plan
  std::vector<NegativeJob> negative;
  std::vector<MosaicJob> mosaic;

  std::size_t size() const noexcept { return negative.size() + mosaic.size(); }
  bool operator==(const Plan&) const = default;
};

}  // namespace countbench
