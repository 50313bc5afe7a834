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

#include "countbench/commands.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>

#include "countbench/density.hpp"
#include "countbench/errors.hpp"
#include "countbench/io.hpp"
#include "countbench/kernels.hpp"
#include "countbench/metrics.hpp"
#include "countbench/mosaic.hpp"
#include "countbench/plan.hpp"
#include "countbench/rng.hpp"
#include "countbench/simulate.hpp"

namespace countbench::cli {

namespace fs = std::filesystem;

std::string config_fingerprint(const Manifest& m, std::span<const std::string> plan_bytes) {
  std::uint64_t h = fnv1a64(kVersion);
  h = fnv1a64(io::manifest_to_json(m).dump(), h);
  for (const auto& bytes : plan_bytes) h = fnv1a64(bytes, h);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v + 0.0);
  return buf;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string("na"); }

// --- plan ------------------------------------------------------------------

struct PlanArgs {
  fs::path manifest;
  std::string test;
  std::string mode = "full";
  std::optional<std::uint32_t> negatives_per_image;
  std::uint64_t seed = 0;
  std::uint32_t max_classes = 1;
  bool no_dedupe = false;
  fs::path out;
};

std::string cmd_plan(const PlanArgs& a) {
  PlanConfig cfg;
  if (a.mode == "full") {
    cfg.mode = PlanMode::full;
  } else if (a.mode == "sampled") {
    cfg.mode = PlanMode::sampled;
    if (!a.negatives_per_image) throw ConfigError("--negatives-per-image is required with --mode sampled");
    cfg.negatives_per_image = *a.negatives_per_image;
  } else {
    throw ConfigError("--mode must be full or sampled");
  }
  if (a.max_classes == 0) throw ConfigError("--max-classes must be at least 1");
  cfg.seed = a.seed;
  cfg.dedupe_prompts_by_class = !a.no_dedupe;

  const Manifest m = filter_manifest(io::load_manifest(a.manifest), a.max_classes);
  Plan plan;
  if (a.test == "negative") {
    plan.test = TestKind::negative;
    plan.negative = build_negative_plan(m, cfg);
  } else if (a.test == "mosaic") {
    plan.test = TestKind::mosaic;
    plan.mosaic = build_mosaic_plan(m, cfg);
  } else {
    throw ConfigError("--test must be negative or mosaic");
  }
  io::save_plan(plan, a.out);
  return std::to_string(plan.size()) + " jobs test=" + a.test + " mode=" + a.mode +
         " images=" + std::to_string(m.entries.size()) + " seed=" + std::to_string(a.seed) +
         " out=" + a.out.generic_string();
}

// --- compose ---------------------------------------------------------------

struct ComposeArgs {
  fs::path manifest;
  fs::path plan;
  std::string policy = "resize_negative_to_positive_width";
  fs::path out_dir;
  std::optional<fs::path> plan_out;
};

// Jobs are composed in chunks so only the images one chunk touches are held
// in memory at a time.
constexpr std::size_t kComposeChunk = 2048;

std::string cmd_compose(const ComposeArgs& a, std::ostream& err) {
  ComposePolicy policy;
  policy.width_policy = parse_width_policy(a.policy);
  const Manifest m = io::load_manifest(a.manifest);
  const ManifestIndex index(m);
  const fs::path manifest_dir = a.manifest.parent_path();
  Plan plan = io::load_plan(a.plan);
  if (plan.test == TestKind::negative) throw ConfigError("compose needs a mosaic plan");
  const fs::path plan_out = a.plan_out.value_or(a.out_dir / "plan.jsonl");
  const fs::path plan_out_dir = plan_out.parent_path();
  fs::create_directories(a.out_dir);

  std::vector<std::string> failures;
  std::set<std::string> failed_images;
  std::size_t written = 0;
  for (std::size_t begin = 0; begin < plan.mosaic.size(); begin += kComposeChunk) {
    const std::size_t end = std::min(plan.mosaic.size(), begin + kComposeChunk);
    std::vector<std::string> ids;
    for (std::size_t i = begin; i < end; ++i) {
      ids.push_back(plan.mosaic[i].pos_image_id);
      ids.push_back(plan.mosaic[i].neg_image_id);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

    std::vector<std::optional<Raster>> images(ids.size());
    std::vector<std::string> load_errors(ids.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t k = 0; k < std::ptrdiff_t(ids.size()); ++k) {
      try {
        const ManifestEntry* e = index.find(ids[k]);
        if (e == nullptr) throw InputError("image_id not in manifest");
        images[k] = io::load_image(manifest_dir / e->image_path);
      } catch (const std::exception& ex) {
        load_errors[k] = ex.what();
      }
    }
    std::map<std::string, const Raster*> by_id;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (images[k]) {
        by_id.emplace(ids[k], &*images[k]);
      } else if (failed_images.insert(ids[k]).second) {
        failures.push_back(ids[k] + ": " + load_errors[k]);
      }
    }

    std::vector<std::string> job_errors(end - begin);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = std::ptrdiff_t(begin); i < std::ptrdiff_t(end); ++i) {
      MosaicJob& job = plan.mosaic[std::size_t(i)];
      auto pos = by_id.find(job.pos_image_id);
      auto neg = by_id.find(job.neg_image_id);
      if (pos == by_id.end() || neg == by_id.end()) continue;
      try {
        const ComposedMosaic c = compose_mosaic(*pos->second, *neg->second, policy);
        const fs::path png = a.out_dir / mosaic_filename(job.pos_image_id, job.neg_image_id);
        io::save_png(c.image, png);
        job.mosaic_path = fs::relative(png, plan_out_dir.empty() ? fs::path(".") : plan_out_dir).generic_string();
        job.boundary_row = c.boundary_row;
      } catch (const std::exception& ex) {
        job_errors[std::size_t(i) - begin] = describe(key_of(job)) + ": " + ex.what();
      }
    }
    for (std::size_t i = begin; i < end; ++i) {
      if (!job_errors[i - begin].empty()) {
        failures.push_back(job_errors[i - begin]);
      } else if (plan.mosaic[i].mosaic_path) {
        ++written;
      }
    }
  }

  if (!failures.empty()) {
    for (const auto& f : failures) err << "compose failed: " << f << "\n";
    throw InputError(std::to_string(failures.size()) + " image(s) or job(s) failed; updated plan not written");
  }
  io::save_plan(plan, plan_out);
  return "mosaics=" + std::to_string(written) + " policy=" + std::string(to_string(policy.width_policy)) +
         " out_dir=" + a.out_dir.generic_string() + " plan_out=" + plan_out.generic_string();
}

// --- simulate --------------------------------------------------------------

struct SimulateArgs {
  fs::path manifest;
  fs::path plan;
  std::string model;
  std::optional<std::string> density;  // "HxW"
  fs::path out;
};

DensityEmission parse_density_size(const std::string& text) {
  unsigned h = 0, w = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%ux%u%c", &h, &w, &tail) != 2 || h < 2 || w < 1) {
    throw ConfigError("--density must be HxW with H >= 2 and W >= 1, got '" + text + "'");
  }
  return {h, w};
}

std::string cmd_simulate(const SimulateArgs& a) {
  SyntheticModelSpec spec;
  spec.kind = parse_synthetic_kind(a.model);
  if (a.density) spec.emit = parse_density_size(*a.density);
  const Manifest m = io::load_manifest(a.manifest);
  const Plan plan = io::load_plan(a.plan);

  std::vector<std::optional<SeamGeometry>> geometry;
  for (const MosaicJob& job : plan.mosaic) geometry.push_back(io::mosaic_geometry(job, a.plan.parent_path()));

  const std::string dmap_dir = a.out.stem().string() + "_dmaps";
  const SyntheticRun run = run_synthetic(spec, plan, m, geometry, dmap_dir);
  const fs::path out_dir = a.out.parent_path();
  std::vector<std::string> errors(run.maps.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(run.maps.size()); ++i) {
    try {
      io::save_density(run.maps[i], out_dir / *run.records[i].density_ref());
    } catch (const std::exception& ex) {
      errors[i] = ex.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw IoError(e);
  }
  io::save_predictions(run.records, a.out);
  return "records=" + std::to_string(run.records.size()) + " maps=" + std::to_string(run.maps.size()) +
         " model=" + to_string(spec.kind) + " out=" + a.out.generic_string();
}

// --- score -----------------------------------------------------------------

struct ScoreArgs {
  fs::path manifest;
  std::vector<fs::path> plans;
  std::vector<fs::path> predictions;
  fs::path out_report;
  std::optional<std::string> format;
  std::optional<fs::path> raw_out;
  std::string model_name = "model";
};

io::ReportFormat format_for(const ScoreArgs& a) {
  if (a.format) return io::parse_report_format(*a.format);
  const std::string ext = a.out_report.extension().string();
  if (ext == ".csv") return io::ReportFormat::csv;
  if (ext == ".md") return io::ReportFormat::markdown;
  return io::ReportFormat::json;
}

std::string cmd_score(const ScoreArgs& a, std::ostream& err) {
  if (a.plans.empty() || a.plans.size() != a.predictions.size()) {
    throw ConfigError("give one --predictions per --plan");
  }
  const io::ReportFormat format = format_for(a);
  const Manifest m = io::load_manifest(a.manifest);

  io::LoadedPredictions merged;
  bool has_negative = false, has_mosaic = false;
  std::vector<std::string> plan_bytes;
  std::uint64_t unmatched = 0, orphans = 0, total_jobs = 0;
  for (std::size_t i = 0; i < a.plans.size(); ++i) {
    plan_bytes.push_back(io::read_text(a.plans[i]));
    const Plan plan = io::plan_from_jsonl(plan_bytes.back(), a.plans[i].string());
    if (!plan.test) continue;
    bool& seen = *plan.test == TestKind::negative ? has_negative : has_mosaic;
    if (seen) throw ConfigError("more than one " + std::string(to_string(*plan.test)) + " plan given");
    seen = true;
    io::LoadedPredictions p = io::load_predictions(a.predictions[i], plan, a.plans[i].parent_path(), m);
    for (const auto& u : p.unmatched) err << "unmatched job: " << u << "\n";
    for (const auto& o : p.orphans) err << "orphan record: " << o << "\n";
    for (const auto& d : p.dropped_images) err << "image dropped from negative test: " << d << "\n";
    unmatched += p.unmatched.size();
    orphans += p.orphans.size();
    total_jobs += plan.size();
    merged.n_scored += p.n_scored;
    if (*plan.test == TestKind::negative) {
      merged.negative = std::move(p.negative);
    } else {
      merged.mosaic = std::move(p.mosaic);
    }
  }
  if (has_negative && merged.negative.images.empty()) throw InputError("no negative-test image could be scored");
  if (has_mosaic && merged.mosaic.pairs.empty()) throw InputError("no mosaic job could be scored");

  MetricsReport r = evaluate(has_negative ? &merged.negative : nullptr, has_mosaic ? &merged.mosaic : nullptr);
  r.model = a.model_name;
  r.n_jobs_scored = merged.n_scored;
  r.unmatched = unmatched;
  r.orphans = orphans;
  r.config_fingerprint = config_fingerprint(m, plan_bytes);
  io::write_report(r, format, a.out_report);
  if (a.raw_out) io::write_text(*a.raw_out, io::scored_to_jsonl(merged));

  return "model=" + r.model + " nmn=" + opt_num(r.nmn) + " pccn=" + opt_num(r.pccn) + " cnt_p=" + opt_num(r.cnt_p) +
         " cnt_r=" + opt_num(r.cnt_r) + " cnt_f1=" + opt_num(r.cnt_f1) + " mae=" + opt_num(r.mae) +
         " rmse=" + opt_num(r.rmse) + " jobs=" + std::to_string(total_jobs) +
         " scored=" + std::to_string(r.n_jobs_scored) + " unmatched=" + std::to_string(unmatched) +
         " orphans=" + std::to_string(orphans) + " fingerprint=" + r.config_fingerprint +
         " out=" + a.out_report.generic_string();
}

// --- viz and drift ---------------------------------------------------------

std::string cmd_viz(const fs::path& density, const fs::path& out) {
  const DensityMap d = io::load_density(density);
  io::render_heatmap(d, out);
  return "height=" + std::to_string(d.height) + " width=" + std::to_string(d.width) + " count=" + num(sum_count(d)) +
         " out=" + out.generic_string();
}

struct DriftArgs {
  fs::path neg_raw;
  fs::path mosaic_raw;
  fs::path out;
  std::optional<fs::path> png;
};

std::string cmd_drift(const DriftArgs& a) {
  const io::ScoredSets neg = io::scored_from_jsonl(io::read_text(a.neg_raw), a.neg_raw.string());
  const io::ScoredSets mos = io::scored_from_jsonl(io::read_text(a.mosaic_raw), a.mosaic_raw.string());
  std::unordered_map<std::string, double> positive_counts;
  for (const auto& img : neg.negative.images) positive_counts.emplace(img.image_id, img.positive);
  const DriftSummary d = drift_stats(positive_counts, mos.mosaic);
  io::write_text(a.out, io::drift_to_csv(d));
  if (a.png) io::save_png(io::render_drift_boxplot(d), *a.png);
  return "n=" + std::to_string(d.n) + " mean=" + num(d.mean) + " median=" + num(d.median) +
         " outliers=" + std::to_string(d.outliers.size()) + " skipped=" + std::to_string(d.skipped.size()) +
         " out=" + a.out.generic_string();
}

// --- validate and convert --------------------------------------------------

struct ValidateArgs {
  fs::path manifest;
  std::optional<fs::path> plan;
  std::optional<fs::path> predictions;
};

std::string cmd_validate(const ValidateArgs& a) {
  const Manifest m = io::load_manifest(a.manifest);
  std::set<std::string> classes;
  for (const auto& e : m.entries) classes.insert(e.class_name);
  std::string line = "entries=" + std::to_string(m.entries.size()) + " classes=" + std::to_string(classes.size());
  if (a.predictions && !a.plan) throw ConfigError("--predictions needs --plan");
  if (a.plan) {
    const Plan plan = io::load_plan(*a.plan);
    const ManifestIndex index(m);
    auto check = [&](const std::string& id) {
      if (index.find(id) == nullptr) throw InputError(a.plan->string() + ": image_id not in manifest: " + id);
    };
    for (const auto& j : plan.negative) check(j.image_id);
    for (const auto& j : plan.mosaic) {
      check(j.pos_image_id);
      check(j.neg_image_id);
    }
    line += " jobs=" + std::to_string(plan.size());
    if (a.predictions) {
      const auto p = io::load_predictions(*a.predictions, plan, a.plan->parent_path(), m);
      line += " scored=" + std::to_string(p.n_scored) + " unmatched=" + std::to_string(p.unmatched.size());
    }
  }
  return line + " ok=1";
}

std::string cmd_convert(const io::Fsc147Sources& src, const fs::path& out) {
  const Manifest m = io::convert_fsc147(src);
  const auto violations = validate_manifest(m);
  if (!violations.empty()) throw InputError("converted manifest is invalid: " + violations.front());
  io::save_manifest(m, out);
  return "entries=" + std::to_string(m.entries.size()) + " split=" + m.split_name + " out=" + out.generic_string();
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Prompt-based counting benchmark harness", "countbench"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: PRACO_THREADS, then all cores)");

  PlanArgs plan;
  auto* plan_cmd = app.add_subcommand("plan", "Build a negative-label or mosaic test plan");
  plan_cmd->add_option("--manifest", plan.manifest, "Manifest JSON")->required();
  plan_cmd->add_option("--test", plan.test, "negative or mosaic")->required()->check(CLI::IsMember({"negative", "mosaic"}));
  plan_cmd->add_option("--mode", plan.mode, "full or sampled")->check(CLI::IsMember({"full", "sampled"}));
  plan_cmd->add_option("--negatives-per-image", plan.negatives_per_image, "Negatives drawn per image (sampled mode)");
  plan_cmd->add_option("--seed", plan.seed, "Sampling seed");
  plan_cmd->add_option("--max-classes", plan.max_classes,
                       "Keep images showing at most this many object classes (1 keeps single-class images; "
                       "2 keeps images with up to two classes)");
  plan_cmd->add_flag("--no-dedupe", plan.no_dedupe, "Sample negative prompts per image instead of per class");
  plan_cmd->add_option("--out", plan.out, "Plan JSONL to write")->required();

  ComposeArgs compose;
  auto* compose_cmd = app.add_subcommand("compose", "Render mosaic images for a mosaic plan");
  compose_cmd->add_option("--manifest", compose.manifest)->required();
  compose_cmd->add_option("--plan", compose.plan)->required();
  compose_cmd->add_option("--policy", compose.policy, "resize_negative_to_positive_width or pad_to_max_width");
  compose_cmd->add_option("--out-dir", compose.out_dir)->required();
  compose_cmd->add_option("--plan-out", compose.plan_out, "Updated plan (default: <out-dir>/plan.jsonl)");

  SimulateArgs simulate;
  auto* simulate_cmd = app.add_subcommand("simulate", "Write predictions of a synthetic model");
  simulate_cmd->add_option("--manifest", simulate.manifest)->required();
  simulate_cmd->add_option("--plan", simulate.plan)->required();
  simulate_cmd->add_option("--model", simulate.model,
                           "perfect | prompt_blind | constant:K | noisy_perfect:SIGMA[:SEED] | class_confuser:LEAK")
      ->required();
  simulate_cmd->add_option("--density", simulate.density, "Emit HxW density maps instead of counts");
  simulate_cmd->add_option("--out", simulate.out, "Prediction JSONL to write")->required();

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "Score predictions against a plan");
  score_cmd->add_option("--manifest", score.manifest)->required();
  score_cmd->add_option("--plan", score.plans, "Plan JSONL (repeatable, paired with --predictions)")->required();
  score_cmd->add_option("--predictions", score.predictions, "Prediction JSONL (repeatable)")->required();
  score_cmd->add_option("--out-report", score.out_report)->required();
  score_cmd->add_option("--format", score.format, "json, csv or markdown (default: from extension)");
  score_cmd->add_option("--raw-out", score.raw_out, "Resolved per-job counts as JSONL");
  score_cmd->add_option("--model-name", score.model_name, "Row label in the report");

  fs::path viz_density, viz_out;
  auto* viz_cmd = app.add_subcommand("viz", "Render a density map as a heat map PNG");
  viz_cmd->add_option("--density", viz_density)->required();
  viz_cmd->add_option("--out", viz_out)->required();

  DriftArgs drift;
  auto* drift_cmd = app.add_subcommand("drift", "Summarize positive count drift between the two tests");
  drift_cmd->add_option("--neg-report-raw", drift.neg_raw)->required();
  drift_cmd->add_option("--mosaic-report-raw", drift.mosaic_raw)->required();
  drift_cmd->add_option("--out", drift.out, "Summary and outlier CSV")->required();
  drift_cmd->add_option("--png", drift.png, "Optional box plot");

  ValidateArgs validate;
  auto* validate_cmd = app.add_subcommand("validate", "Check a manifest, and optionally a plan and predictions");
  validate_cmd->add_option("--manifest", validate.manifest)->required();
  validate_cmd->add_option("--plan", validate.plan);
  validate_cmd->add_option("--predictions", validate.predictions);

  io::Fsc147Sources fsc;
  fs::path fsc_out, fsc_class_counts;
  auto* convert_cmd = app.add_subcommand("convert-fsc147", "Build a manifest from FSC-147 release files");
  convert_cmd->add_option("--annotations", fsc.annotations)->required();
  convert_cmd->add_option("--splits", fsc.splits)->required();
  convert_cmd->add_option("--classes", fsc.classes)->required();
  convert_cmd->add_option("--class-counts", fsc_class_counts);
  convert_cmd->add_option("--split", fsc.split);
  convert_cmd->add_option("--image-prefix", fsc.image_prefix);
  convert_cmd->add_option("--out", fsc_out)->required();

  std::vector<std::string> argv_storage;
  argv_storage.emplace_back("countbench");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_storage) argv.push_back(s.data());

  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  CLI::App* active = app.get_subcommands().front();
  try {
    kernels::set_thread_count(kernels::resolve_thread_count(threads));
    std::string summary;
    if (active == plan_cmd) {
      summary = cmd_plan(plan);
    } else if (active == compose_cmd) {
      summary = cmd_compose(compose, err);
    } else if (active == simulate_cmd) {
      summary = cmd_simulate(simulate);
    } else if (active == score_cmd) {
      summary = cmd_score(score, err);
    } else if (active == viz_cmd) {
      summary = cmd_viz(viz_density, viz_out);
    } else if (active == drift_cmd) {
      summary = cmd_drift(drift);
    } else if (active == validate_cmd) {
      summary = cmd_validate(validate);
    } else {
      if (!fsc_class_counts.empty()) fsc.class_counts = fsc_class_counts;
      summary = cmd_convert(fsc, fsc_out);
    }
    out << summary << "\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n\n" << active->help();
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace countbench::cli
