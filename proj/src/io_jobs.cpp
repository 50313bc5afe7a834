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

#include <cstring>
#include <map>
#include <unordered_map>

#include "countbench/density.hpp"
#include "countbench/errors.hpp"
#include "countbench/io.hpp"

namespace countbench::io {

namespace {

// Iterates non-blank lines with 1-based line numbers.
template <class Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    fn(line, line_no);
  }
}

struct LineContext {
  const std::string& source;
  std::size_t line;

  [[noreturn]] void fail(const std::string& what) const {
    throw InputError(source + ":" + std::to_string(line) + ": " + what);
  }
};

Json parse_line(std::string_view line, const LineContext& ctx) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    ctx.fail("malformed JSON at column " + std::to_string(e.byte));
  }
  if (!j.is_object()) ctx.fail("expected a JSON object");
  return j;
}

std::string get_string(const Json& j, const char* key, const LineContext& ctx) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) ctx.fail(std::string("missing string field ") + key);
  return it->get<std::string>();
}

std::optional<double> get_number(const Json& j, const char* key, const LineContext& ctx) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) ctx.fail(std::string(key) + " must be a number");
  return it->get<double>();
}

std::optional<std::string> get_optional_string(const Json& j, const char* key, const LineContext& ctx) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) ctx.fail(std::string(key) + " must be a string");
  return it->get<std::string>();
}

TestKind get_test(const Json& j, const LineContext& ctx) {
  const std::string test = get_string(j, "test", ctx);
  if (test == "negative") return TestKind::negative;
  if (test == "mosaic") return TestKind::mosaic;
  ctx.fail("unknown test '" + test + "'");
}

JobKey get_key(const Json& j, TestKind test, const LineContext& ctx) {
  if (test == TestKind::negative) return NegativeKey{get_string(j, "image_id", ctx), get_string(j, "prompt_class", ctx)};
  return MosaicKey{get_string(j, "pos_image_id", ctx), get_string(j, "neg_image_id", ctx),
                   get_string(j, "prompt_class", ctx)};
}

Json key_json(const JobKey& key) {
  Json j;
  if (const auto* n = std::get_if<NegativeKey>(&key)) {
    j["test"] = "negative";
    j["image_id"] = n->image_id;
    j["prompt_class"] = n->prompt_class;
  } else {
    const auto& m = std::get<MosaicKey>(key);
    j["test"] = "mosaic";
    j["pos_image_id"] = m.pos_image_id;
    j["neg_image_id"] = m.neg_image_id;
    j["prompt_class"] = m.prompt_class;
  }
  return j;
}

struct ParsedRecord {
  PredictionRecord record;
  std::size_t line;
};

std::vector<ParsedRecord> parse_records(std::string_view text, const std::string& source) {
  std::vector<ParsedRecord> out;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    const LineContext ctx{source, line_no};
    const Json j = parse_line(line, ctx);
    const TestKind test = get_test(j, ctx);
    JobKey key = get_key(j, test, ctx);
    try {
      out.push_back({PredictionRecord(std::move(key), get_number(j, "count", ctx), get_number(j, "c_pos", ctx),
                                      get_number(j, "c_neg", ctx), get_optional_string(j, "density_ref", ctx)),
                     line_no});
    } catch (const InputError& e) {
      ctx.fail(e.what());
    }
  });
  return out;
}

}  // namespace

// --- plans -----------------------------------------------------------------

std::string plan_to_jsonl(const Plan& plan) {
  std::string out;
  for (const NegativeJob& job : plan.negative) {
    Json j;
    j["test"] = "negative";
    j["image_id"] = job.image_id;
    j["prompt_class"] = job.prompt_class;
    j["is_positive"] = job.is_positive;
    out += j.dump() + "\n";
  }
  for (const MosaicJob& job : plan.mosaic) {
    Json j;
    j["test"] = "mosaic";
    j["pos_image_id"] = job.pos_image_id;
    j["neg_image_id"] = job.neg_image_id;
    j["prompt_class"] = job.prompt_class;
    j["mosaic_path"] = job.mosaic_path ? Json(*job.mosaic_path) : Json(nullptr);
    j["boundary_row"] = job.boundary_row ? Json(*job.boundary_row) : Json(nullptr);
    out += j.dump() + "\n";
  }
  return out;
}

Plan plan_from_jsonl(std::string_view text, const std::string& source) {
  Plan plan;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    const LineContext ctx{source, line_no};
    const Json j = parse_line(line, ctx);
    const TestKind test = get_test(j, ctx);
    if (plan.test && *plan.test != test) ctx.fail("plan mixes negative and mosaic jobs");
    plan.test = test;
    if (test == TestKind::negative) {
      auto it = j.find("is_positive");
      if (it == j.end() || !it->is_boolean()) ctx.fail("missing boolean field is_positive");
      plan.negative.push_back({get_string(j, "image_id", ctx), get_string(j, "prompt_class", ctx), it->get<bool>()});
    } else {
      MosaicJob job{get_string(j, "pos_image_id", ctx), get_string(j, "neg_image_id", ctx),
                    get_string(j, "prompt_class", ctx), get_optional_string(j, "mosaic_path", ctx), std::nullopt};
      if (auto it = j.find("boundary_row"); it != j.end() && !it->is_null()) {
        if (!it->is_number_unsigned() || it->get<std::uint64_t>() == 0 || it->get<std::uint64_t>() > UINT32_MAX) {
          ctx.fail("boundary_row must be a positive integer");
        }
        job.boundary_row = it->get<std::uint32_t>();
      }
      if (job.pos_image_id == job.neg_image_id) ctx.fail("mosaic job pairs an image with itself");
      plan.mosaic.push_back(std::move(job));
    }
  });
  return plan;
}

Plan load_plan(const fs::path& path) { return plan_from_jsonl(read_text(path), path.string()); }

void save_plan(const Plan& plan, const fs::path& path) { write_text(path, plan_to_jsonl(plan)); }

std::optional<SeamGeometry> mosaic_geometry(const MosaicJob& job, const fs::path& plan_dir) {
  if (!job.mosaic_path || !job.boundary_row) return std::nullopt;
  const fs::path image = plan_dir / *job.mosaic_path;
  const auto size = png_size(image);
  if (!size) throw InputError(describe(key_of(job)) + ": cannot read mosaic header " + image.string());
  return SeamGeometry{*job.boundary_row, size->second};
}

// --- predictions -----------------------------------------------------------

std::string predictions_to_jsonl(std::span<const PredictionRecord> records) {
  std::string out;
  for (const PredictionRecord& r : records) {
    Json j = key_json(r.key());
    if (r.count()) j["count"] = *r.count();
    if (r.c_pos()) {
      j["c_pos"] = *r.c_pos();
      j["c_neg"] = *r.c_neg();
    }
    if (r.density_ref()) j["density_ref"] = *r.density_ref();
    out += j.dump() + "\n";
  }
  return out;
}

std::vector<PredictionRecord> predictions_from_jsonl(std::string_view text, const std::string& source) {
  std::vector<PredictionRecord> out;
  for (auto& p : parse_records(text, source)) out.push_back(std::move(p.record));
  return out;
}

void save_predictions(std::span<const PredictionRecord> records, const fs::path& path) {
  write_text(path, predictions_to_jsonl(records));
}

LoadedPredictions load_predictions(const fs::path& path, const Plan& plan, const fs::path& plan_dir,
                                   const Manifest& m) {
  const std::string source = path.string();
  const fs::path pred_dir = path.parent_path();
  auto parsed = parse_records(read_text(path), source);
  const ManifestIndex index(m);

  std::map<NegativeKey, std::size_t> negative_slot;
  std::map<MosaicKey, std::size_t> mosaic_slot;
  for (std::size_t i = 0; i < plan.negative.size(); ++i) negative_slot.emplace(key_of(plan.negative[i]), i);
  for (std::size_t i = 0; i < plan.mosaic.size(); ++i) {
    mosaic_slot.emplace(key_of(plan.mosaic[i]), plan.negative.size() + i);
  }

  LoadedPredictions out;
  const std::size_t n_jobs = plan.size();
  std::vector<const ParsedRecord*> by_job(n_jobs, nullptr);
  std::vector<std::string> duplicates;
  for (const ParsedRecord& p : parsed) {
    std::optional<std::size_t> slot;
    if (const auto* k = std::get_if<NegativeKey>(&p.record.key())) {
      if (auto it = negative_slot.find(*k); it != negative_slot.end()) slot = it->second;
    } else if (auto it = mosaic_slot.find(std::get<MosaicKey>(p.record.key())); it != mosaic_slot.end()) {
      slot = it->second;
    }
    if (!slot) {
      out.orphans.push_back(describe(p.record.key()));
    } else if (by_job[*slot] != nullptr) {
      duplicates.push_back(describe(p.record.key()) + " (lines " + std::to_string(by_job[*slot]->line) + " and " +
                           std::to_string(p.line) + ")");
    } else {
      by_job[*slot] = &p;
    }
  }
  if (!duplicates.empty()) {
    std::string msg = source + ": duplicate records for:";
    for (const auto& d : duplicates) msg += "\n  " + d;
    throw InputError(msg);
  }

  // Resolve every answered job to counts; density files are read in parallel.
  std::vector<double> first(n_jobs, 0.0), second(n_jobs, 0.0);
  std::vector<std::string> errors(n_jobs);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t t = 0; t < std::ptrdiff_t(n_jobs); ++t) {
    const auto i = std::size_t(t);
    const ParsedRecord* p = by_job[i];
    if (p == nullptr) continue;
    const PredictionRecord& r = p->record;
    try {
      if (r.count()) {
        first[i] = *r.count();
      } else if (r.c_pos()) {
        first[i] = *r.c_pos();
        second[i] = *r.c_neg();
      } else {
        const fs::path ref = fs::path(*r.density_ref()).is_absolute() ? fs::path(*r.density_ref())
                                                                        : pred_dir / *r.density_ref();
        const DensityMap d = load_density(ref);
        if (i < plan.negative.size()) {
          first[i] = sum_count(d);
        } else {
          const MosaicJob& job = plan.mosaic[i - plan.negative.size()];
          const SplitCounts split = split_density_at(d, seam_row(d.height, mosaic_geometry(job, plan_dir)));
          first[i] = split.c_pos;
          second[i] = split.c_neg;
        }
      }
    } catch (const std::exception& e) {
      errors[i] = source + ":" + std::to_string(p->line) + ": " + describe(r.key()) + ": " + e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw InputError(e);
  }

  // Negative test: group jobs by image, images in order of first appearance.
  std::vector<ImageNegatives> images;
  std::vector<bool> has_positive;
  std::unordered_map<std::string, std::size_t> image_slot;
  for (std::size_t i = 0; i < plan.negative.size(); ++i) {
    const NegativeJob& job = plan.negative[i];
    auto [it, fresh] = image_slot.emplace(job.image_id, images.size());
    if (fresh) {
      images.push_back({job.image_id, double(index.at(job.image_id).gt_count), 0.0, {}});
      has_positive.push_back(false);
    }
    if (by_job[i] == nullptr) {
      out.unmatched.push_back(describe(key_of(job)));
      continue;
    }
    ++out.n_scored;
    ImageNegatives& img = images[it->second];
    if (job.is_positive) {
      img.positive = first[i];
      has_positive[it->second] = true;
    } else {
      img.negatives.emplace_back(job.prompt_class, first[i]);
    }
  }
  for (std::size_t k = 0; k < images.size(); ++k) {
    if (has_positive[k] && !images[k].negatives.empty()) {
      out.negative.images.push_back(std::move(images[k]));
    } else {
      out.dropped_images.push_back(images[k].image_id);
    }
  }

  for (std::size_t k = 0; k < plan.mosaic.size(); ++k) {
    const MosaicJob& job = plan.mosaic[k];
    const std::size_t slot = plan.negative.size() + k;
    if (by_job[slot] == nullptr) {
      out.unmatched.push_back(describe(key_of(job)));
      continue;
    }
    ++out.n_scored;
    out.mosaic.pairs.push_back(
        {job.pos_image_id, job.neg_image_id, first[slot], second[slot], double(index.at(job.pos_image_id).gt_count)});
  }
  return out;
}

// --- resolved scores -------------------------------------------------------

std::string scored_to_jsonl(const LoadedPredictions& p) {
  std::string out;
  for (const ImageNegatives& img : p.negative.images) {
    Json pos;
    pos["test"] = "negative";
    pos["image_id"] = img.image_id;
    pos["prompt_class"] = nullptr;
    pos["is_positive"] = true;
    pos["count"] = img.positive;
    pos["gt"] = img.gt;
    out += pos.dump() + "\n";
    for (const auto& [prompt, count] : img.negatives) {
      Json j;
      j["test"] = "negative";
      j["image_id"] = img.image_id;
      j["prompt_class"] = prompt;
      j["is_positive"] = false;
      j["count"] = count;
      j["gt"] = img.gt;
      out += j.dump() + "\n";
    }
  }
  for (const MosaicPairScore& s : p.mosaic.pairs) {
    Json j;
    j["test"] = "mosaic";
    j["pos_image_id"] = s.pos_image_id;
    j["neg_image_id"] = s.neg_image_id;
    j["c_pos"] = s.c_pos;
    j["c_neg"] = s.c_neg;
    j["gt"] = s.gt;
    out += j.dump() + "\n";
  }
  return out;
}

ScoredSets scored_from_jsonl(std::string_view text, const std::string& source) {
  ScoredSets out;
  std::unordered_map<std::string, std::size_t> image_slot;
  std::vector<bool> has_positive;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    const LineContext ctx{source, line_no};
    const Json j = parse_line(line, ctx);
    const auto gt = get_number(j, "gt", ctx);
    if (!gt || !(*gt > 0.0)) ctx.fail("gt must be a positive number");
    if (get_test(j, ctx) == TestKind::negative) {
      const std::string image_id = get_string(j, "image_id", ctx);
      const auto count = get_number(j, "count", ctx);
      if (!count) ctx.fail("missing count");
      auto [it, fresh] = image_slot.emplace(image_id, out.negative.images.size());
      if (fresh) {
        out.negative.images.push_back({image_id, *gt, 0.0, {}});
        has_positive.push_back(false);
      }
      ImageNegatives& img = out.negative.images[it->second];
      auto pos = j.find("is_positive");
      if (pos == j.end() || !pos->is_boolean()) ctx.fail("missing boolean field is_positive");
      if (pos->get<bool>()) {
        if (has_positive[it->second]) ctx.fail("second positive count for image " + image_id);
        has_positive[it->second] = true;
        img.positive = *count;
      } else {
        img.negatives.emplace_back(get_string(j, "prompt_class", ctx), *count);
      }
    } else {
      const auto c_pos = get_number(j, "c_pos", ctx);
      const auto c_neg = get_number(j, "c_neg", ctx);
      if (!c_pos || !c_neg) ctx.fail("missing c_pos or c_neg");
      out.mosaic.pairs.push_back({get_string(j, "pos_image_id", ctx), get_string(j, "neg_image_id", ctx), *c_pos,
                                  *c_neg, *gt});
    }
  });
  for (std::size_t k = 0; k < has_positive.size(); ++k) {
    if (!has_positive[k]) throw InputError(source + ": image " + out.negative.images[k].image_id + " has no positive count");
  }
  return out;
}

// --- density maps ----------------------------------------------------------

DensityMap load_density(const fs::path& path) {
  const auto bytes = read_bytes(path);
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), "DMAP", 4) == 0) {
    try {
      return decode_dmap(bytes);
    } catch (const FormatError& e) {
      throw FormatError(e.offset(), e.detail(), path.string());
    }
  }
  try {
    return decode_density_csv(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void save_density(const DensityMap& d, const fs::path& path) {
  if (path.extension() == ".csv") {
    write_text(path, encode_density_csv(d));
  } else {
    write_bytes(path, encode_dmap(d));
  }
}

}  // namespace countbench::io
