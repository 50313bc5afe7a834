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

#include "countbench/plan.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "countbench/errors.hpp"
#include "countbench/rng.hpp"

namespace countbench {

namespace {

std::vector<const ManifestEntry*> sorted_by_id(const Manifest& m) {
  ManifestIndex index(m);  // rejects duplicate ids
  std::vector<const ManifestEntry*> out;
  out.reserve(m.entries.size());
  for (const ManifestEntry& e : m.entries) out.push_back(&e);
  std::sort(out.begin(), out.end(), [](const auto* a, const auto* b) { return a->image_id < b->image_id; });
  return out;
}

// Draws k distinct positions of pool with a partial Fisher-Yates shuffle.
template <class T>
std::vector<T> draw_without_replacement(std::vector<T> pool, std::uint32_t k, CounterRng rng) {
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + std::size_t(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

void check_sampling(const PlanConfig& cfg, std::size_t pool_size, const std::string& image_id) {
  if (cfg.negatives_per_image == 0) {
    throw ConfigError("sampled mode requires negatives_per_image >= 1");
  }
  if (cfg.negatives_per_image > pool_size) {
    throw ConfigError("negatives_per_image " + std::to_string(cfg.negatives_per_image) +
                      " exceeds the " + std::to_string(pool_size) + " eligible negatives of image " + image_id);
  }
}

}  // namespace

Manifest filter_manifest(const Manifest& m, std::uint32_t max_classes) {
  Manifest out;
  out.split_name = m.split_name;
  out.source_note = m.source_note;
  for (const ManifestEntry& e : m.entries) {
    if (e.class_count_in_image <= max_classes) out.entries.push_back(e);
  }
  return out;
}

std::vector<NegativeJob> build_negative_plan(const Manifest& m, const PlanConfig& cfg) {
  const auto images = sorted_by_id(m);
  std::set<std::string> classes;
  for (const auto* e : images) classes.insert(e->class_name);

  std::vector<NegativeJob> jobs;
  for (const auto* image : images) {
    // Candidate negative prompts: one per distinct class, or one per other
    // image when not deduplicating (so frequent classes are drawn more often).
    std::vector<std::string> pool;
    if (cfg.dedupe_prompts_by_class) {
      for (const auto& c : classes) {
        if (c != image->class_name) pool.push_back(c);
      }
    } else {
      for (const auto* other : images) {
        if (other->class_name != image->class_name) pool.push_back(other->class_name);
      }
    }

    std::set<std::string> prompts;
    if (cfg.mode == PlanMode::full) {
      prompts.insert(pool.begin(), pool.end());
    } else {
      check_sampling(cfg, pool.size(), image->image_id);
      auto picked = draw_without_replacement(std::move(pool), cfg.negatives_per_image,
                                             CounterRng::keyed(cfg.seed, "negative", image->image_id));
      prompts.insert(picked.begin(), picked.end());
    }
    prompts.insert(image->class_name);
    for (const auto& prompt : prompts) {
      jobs.push_back({image->image_id, prompt, prompt == image->class_name});
    }
  }
  return jobs;
}

std::vector<MosaicJob> build_mosaic_plan(const Manifest& m, const PlanConfig& cfg) {
  const auto images = sorted_by_id(m);
  std::vector<MosaicJob> jobs;
  for (const auto* pos : images) {
    std::vector<const ManifestEntry*> pool;
    for (const auto* neg : images) {
      if (neg->class_name != pos->class_name) pool.push_back(neg);
    }
    if (cfg.mode == PlanMode::sampled) {
      check_sampling(cfg, pool.size(), pos->image_id);
      pool = draw_without_replacement(std::move(pool), cfg.negatives_per_image,
                                      CounterRng::keyed(cfg.seed, "mosaic", pos->image_id));
      std::sort(pool.begin(), pool.end(), [](const auto* a, const auto* b) { return a->image_id < b->image_id; });
    }
    for (const auto* neg : pool) {
      jobs.push_back({pos->image_id, neg->image_id, pos->class_name, std::nullopt, std::nullopt});
    }
  }
  return jobs;
}

}  // namespace countbench
