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

#include "countbench/core.hpp"

#include <cmath>
#include <unordered_set>

#include "countbench/errors.hpp"

namespace countbench {

std::vector<std::string> validate_manifest(const Manifest& m) {
  std::vector<std::string> violations;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    const ManifestEntry& e = m.entries[i];
    const std::string name = e.image_id.empty() ? "#" + std::to_string(i) : e.image_id;
    if (e.image_id.empty()) {
      violations.push_back("entry " + name + ": empty image_id");
    } else if (!seen.insert(e.image_id).second) {
      violations.push_back("duplicate image_id: " + e.image_id);
    }
    if (e.class_name.empty()) {
      violations.push_back("entry " + name + ": missing class_name");
    }
    if (e.gt_count < 1) {
      violations.push_back("entry " + name + ": gt_count must be >= 1");
    }
    if (e.class_count_in_image < 1) {
      violations.push_back("entry " + name + ": class_count_in_image must be >= 1");
    }
    if (e.points) {
      if (e.points->size() != e.gt_count) {
        violations.push_back("entry " + name + ": points length " + std::to_string(e.points->size()) +
                             " != gt_count " + std::to_string(e.gt_count));
      }
      for (const Point& p : *e.points) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
          violations.push_back("entry " + name + ": non-finite point coordinate");
          break;
        }
      }
    }
  }
  return violations;
}

ManifestIndex::ManifestIndex(const Manifest& m) : manifest_(&m) {
  by_id_.reserve(m.entries.size());
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    if (!by_id_.emplace(m.entries[i].image_id, i).second) {
      throw InputError("duplicate image_id: " + m.entries[i].image_id);
    }
  }
}

const ManifestEntry* ManifestIndex::find(std::string_view image_id) const {
  auto it = by_id_.find(std::string(image_id));
  return it == by_id_.end() ? nullptr : &manifest_->entries[it->second];
}

const ManifestEntry& ManifestIndex::at(std::string_view image_id) const {
  const ManifestEntry* e = find(image_id);
  if (e == nullptr) {
    throw InputError("image_id not in manifest: " + std::string(image_id));
  }
  return *e;
}

std::string_view to_string(TestKind kind) { return kind == TestKind::negative ? "negative" : "mosaic"; }

NegativeKey key_of(const NegativeJob& job) { return {job.image_id, job.prompt_class}; }

MosaicKey key_of(const MosaicJob& job) { return {job.pos_image_id, job.neg_image_id, job.prompt_class}; }

std::string describe(const JobKey& key) {
  if (const auto* n = std::get_if<NegativeKey>(&key)) {
    return "negative(" + n->image_id + ", " + n->prompt_class + ")";
  }
  const auto& m = std::get<MosaicKey>(key);
  return "mosaic(" + m.pos_image_id + ", " + m.neg_image_id + ", " + m.prompt_class + ")";
}

namespace {

void check_count(const char* field, const std::optional<double>& v, const JobKey& key) {
  if (v && (!std::isfinite(*v) || *v < 0.0)) {
    throw InputError(describe(key) + ": " + field + " must be a finite non-negative number");
  }
}

}  // namespace

PredictionRecord::PredictionRecord(JobKey key, std::optional<double> count, std::optional<double> c_pos,
                                   std::optional<double> c_neg, std::optional<std::string> density_ref)
    : key_(std::move(key)),
      count_(count),
      c_pos_(c_pos),
      c_neg_(c_neg),
      density_ref_(std::move(density_ref)) {
  const bool has_pair_part = c_pos_.has_value() || c_neg_.has_value();
  const int forms = int(count_.has_value()) + int(has_pair_part) + int(density_ref_.has_value());
  if (forms != 1) {
    throw InputError(describe(key_) + ": exactly one of count, (c_pos, c_neg) or density_ref must be set");
  }
  if (has_pair_part && !(c_pos_ && c_neg_)) {
    throw InputError(describe(key_) + ": c_pos and c_neg must be given together");
  }
  if (count_ && test() != TestKind::negative) {
    throw InputError(describe(key_) + ": count form is only valid for negative-test jobs");
  }
  if (has_pair_part && test() != TestKind::mosaic) {
    throw InputError(describe(key_) + ": (c_pos, c_neg) form is only valid for mosaic jobs");
  }
  if (density_ref_ && density_ref_->empty()) {
    throw InputError(describe(key_) + ": empty density_ref");
  }
  check_count("count", count_, key_);
  check_count("c_pos", c_pos_, key_);
  check_count("c_neg", c_neg_, key_);
}

PredictionRecord PredictionRecord::with_count(NegativeKey key, double count) {
  return PredictionRecord(std::move(key), count, std::nullopt, std::nullopt, std::nullopt);
}

PredictionRecord PredictionRecord::with_split(MosaicKey key, double c_pos, double c_neg) {
  return PredictionRecord(std::move(key), std::nullopt, c_pos, c_neg, std::nullopt);
}

PredictionRecord PredictionRecord::with_density(JobKey key, std::string density_ref) {
  return PredictionRecord(std::move(key), std::nullopt, std::nullopt, std::nullopt, std::move(density_ref));
}

TestKind PredictionRecord::test() const noexcept {
  return std::holds_alternative<NegativeKey>(key_) ? TestKind::negative : TestKind::mosaic;
}

}  // namespace countbench
