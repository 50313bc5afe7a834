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

// Shared test fixtures: temporary directories, small manifests, synthetic
// images and an in-process CLI runner.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "countbench/core.hpp"
#include "countbench/mosaic.hpp"
#include "countbench/rng.hpp"

namespace countbench::testing {

namespace fs = std::filesystem;

// Creates a fresh directory and removes it on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const noexcept { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

struct EntrySpec {
  std::string image_id;
  std::string class_name;
  std::uint64_t gt_count;
  std::uint32_t class_count_in_image = 1;
};

// Entries with image_path "img/<image_id>.png" and no points.
Manifest make_manifest(const std::vector<EntrySpec>& specs);

// n images over n_classes classes (round-robin), gt in [1, max_gt].
Manifest random_manifest(CounterRng& rng, std::size_t n, std::size_t n_classes, std::uint64_t max_gt = 40);

// Manifest of n images with n distinct classes and gt counts 3, 5, 7, ...
Manifest distinct_class_manifest(std::size_t n);

// Deterministic pattern image.
Raster pattern_image(std::uint32_t width, std::uint32_t height, std::uint32_t salt);

// Writes the manifest plus one PNG per entry (sizes cycle through a fixed
// list) under dir. Returns the manifest path.
fs::path write_fixture(const fs::path& dir, const Manifest& m);

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};
CliResult run_cli(const std::vector<std::string>& args);

std::string read_file(const fs::path& path);

}  // namespace countbench::testing
