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
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "countbench/core.hpp"
#include "countbench/mosaic.hpp"
#include "countbench/plan.hpp"

namespace countbench {

// Synthetic counting models with known metric outcomes.
struct PerfectModel {};
struct PromptBlindModel {};
struct ConstantModel {
  double k = 0.0;
};
struct NoisyPerfectModel {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};
struct ClassConfuserModel {
  double leak = 0.0;  // fraction of an absent class's count emitted anyway
};

using SyntheticKind = std::variant<PerfectModel, PromptBlindModel, ConstantModel, NoisyPerfectModel, ClassConfuserModel>;

struct CountsEmission {};
struct DensityEmission {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
};
using Emission = std::variant<CountsEmission, DensityEmission>;

struct SyntheticModelSpec {
  SyntheticKind kind;
  Emission emit = CountsEmission{};
};

// Parses "perfect", "prompt_blind", "constant:K", "noisy_perfect:SIGMA[:SEED]"
// or "class_confuser:LEAK". Throws ConfigError.
SyntheticKind parse_synthetic_kind(std::string_view text);
std::string to_string(const SyntheticKind& kind);

struct SyntheticRun {
  std::vector<PredictionRecord> records;  // one per job, in plan order
  std::vector<DensityMap> maps;           // maps[i] backs records[i] in density mode
};

// Emits one record per plan job. In density mode every record references
// "<density_dir>/<test>_<index>.dmap" and the matching map is returned; the
// counts are drawn as unit dots at uniform positions (top/bottom of the seam
// for mosaics) plus one fractional cell. mosaic_geometry, when non-empty, is
// aligned with plan.mosaic and fixes each job's seam.
SyntheticRun run_synthetic(const SyntheticModelSpec& spec, const Plan& plan, const Manifest& m,
                           std::span<const std::optional<SeamGeometry>> mosaic_geometry = {},
                           std::string_view density_dir = "dmaps");

}  // namespace countbench
