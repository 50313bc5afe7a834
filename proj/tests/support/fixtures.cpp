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

#include "fixtures.hpp"

#include <atomic>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "countbench/commands.hpp"
#include "countbench/io.hpp"

namespace countbench::testing {

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("countbench_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

Manifest make_manifest(const std::vector<EntrySpec>& specs) {
  Manifest m;
  m.split_name = "test";
  for (const auto& s : specs) {
    ManifestEntry e;
    e.image_id = s.image_id;
    e.image_path = "img/" + s.image_id + ".png";
    e.class_name = s.class_name;
    e.gt_count = s.gt_count;
    e.class_count_in_image = s.class_count_in_image;
    m.entries.push_back(std::move(e));
  }
  return m;
}

Manifest random_manifest(CounterRng& rng, std::size_t n, std::size_t n_classes, std::uint64_t max_gt) {
  std::vector<EntrySpec> specs;
  for (std::size_t i = 0; i < n; ++i) {
    specs.push_back({"img" + std::to_string(1000 + i), "class" + std::to_string(i % n_classes),
                     1 + rng.below(max_gt)});
  }
  return make_manifest(specs);
}

Manifest distinct_class_manifest(std::size_t n) {
  std::vector<EntrySpec> specs;
  for (std::size_t i = 0; i < n; ++i) {
    specs.push_back({"im" + std::to_string(i), "cls" + std::to_string(i), 3 + 2 * i});
  }
  return make_manifest(specs);
}

Raster pattern_image(std::uint32_t width, std::uint32_t height, std::uint32_t salt) {
  Raster r(width, height);
  for (std::uint32_t y = 0; y < height; ++y) {
    for (std::uint32_t x = 0; x < width; ++x) {
      r.set(x, y,
            {std::uint8_t((x * 7 + salt * 31) & 0xff), std::uint8_t((y * 11 + salt * 17) & 0xff),
             std::uint8_t(((x ^ y) * 5 + salt) & 0xff)});
    }
  }
  return r;
}

fs::path write_fixture(const fs::path& dir, const Manifest& m) {
  static constexpr std::pair<std::uint32_t, std::uint32_t> kSizes[] = {{40, 30}, {24, 36}, {50, 20}, {32, 32}, {17, 23}};
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    const auto [w, h] = kSizes[i % std::size(kSizes)];
    io::save_png(pattern_image(w, h, std::uint32_t(i)), dir / m.entries[i].image_path);
  }
  const fs::path manifest = dir / "manifest.json";
  io::save_manifest(m, manifest);
  return manifest;
}

CliResult run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliResult r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace countbench::testing
