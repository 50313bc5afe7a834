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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "countbench/commands.hpp"
#include "countbench/density.hpp"
#include "countbench/io.hpp"
#include "countbench/metrics.hpp"
#include "countbench/simulate.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace countbench {
namespace {

namespace fs = std::filesystem;
using testing::rel_close;

// Collects failure details for one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    failed_ = failed_ || !ok;
  }
  bool failed() const { return failed_; }
  std::string detail() const {
    std::string s;
    for (const auto& f : failures_) s += (s.empty() ? "" : "; ") + f;
    return s;
  }

 private:
  bool failed_ = false;
  std::vector<std::string> failures_;
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Scored {
  io::LoadedPredictions negative;
  io::LoadedPredictions mosaic;
};

// Writes the records to disk and reads them back through the regular join.
Scored load_both(const fs::path& dir, const Manifest& m, const Plan& neg, const Plan& mos,
                 const std::vector<PredictionRecord>& neg_records, const std::vector<PredictionRecord>& mos_records,
                 const std::vector<DensityMap>& neg_maps = {}, const std::vector<DensityMap>& mos_maps = {}) {
  for (std::size_t i = 0; i < neg_maps.size(); ++i) io::save_density(neg_maps[i], dir / *neg_records[i].density_ref());
  for (std::size_t i = 0; i < mos_maps.size(); ++i) io::save_density(mos_maps[i], dir / *mos_records[i].density_ref());
  io::save_predictions(neg_records, dir / "neg_pred.jsonl");
  io::save_predictions(mos_records, dir / "mos_pred.jsonl");
  return {io::load_predictions(dir / "neg_pred.jsonl", neg, dir, m),
          io::load_predictions(dir / "mos_pred.jsonl", mos, dir, m)};
}

Plan negative_plan(const Manifest& m, const PlanConfig& c = {}) { return {TestKind::negative, build_negative_plan(m, c), {}}; }
Plan mosaic_plan(const Manifest& m, const PlanConfig& c = {}) { return {TestKind::mosaic, {}, build_mosaic_plan(m, c)}; }

MetricsReport evaluate_model(const fs::path& dir, const Manifest& m, const SyntheticModelSpec& spec) {
  const Plan neg = negative_plan(m), mos = mosaic_plan(m);
  const SyntheticRun rn = run_synthetic(spec, neg, m, {}, "maps");
  const SyntheticRun rm = run_synthetic(spec, mos, m, {}, "maps");
  const Scored s = load_both(dir, m, neg, mos, rn.records, rm.records, rn.maps, rm.maps);
  return evaluate(&s.negative.negative, &s.mosaic.mosaic);
}

// --- criteria --------------------------------------------------------------

Check ideal_configuration() {
  Check c;
  const auto start = std::chrono::steady_clock::now();
  testing::TempDir dir;
  const Manifest m = testing::distinct_class_manifest(5);
  const MetricsReport r = evaluate_model(dir.path(), m, {PerfectModel{}, CountsEmission{}});
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.expect(r.nmn == 0.0, "NMN " + num(*r.nmn));
  c.expect(r.pccn == 100.0, "PCCN " + num(*r.pccn));
  c.expect(r.cnt_p == 1.0 && r.cnt_r == 1.0 && r.cnt_f1 == 1.0, "CntP/CntR/CntF1 not 1");
  c.expect(r.mae == 0.0 && r.rmse == 0.0, "MAE/RMSE not 0");
  c.expect(seconds < 1.0, "runtime " + num(seconds) + " s");
  return c;
}

Check prompt_blind_closed_form() {
  Check c;
  const auto start = std::chrono::steady_clock::now();
  testing::TempDir dir;
  CounterRng rng(2026);
  for (std::size_t n = 2; n <= 12; ++n) {
    const Manifest m = testing::random_manifest(rng, n, n, 60);
    const MetricsReport r = evaluate_model(dir.path(), m, {PromptBlindModel{}, CountsEmission{}});
    long double sum = 0;
    std::size_t pairs = 0;
    for (const auto& a : m.entries) {
      for (const auto& b : m.entries) {
        if (&a == &b) continue;
        sum += (long double)a.gt_count / (long double)(a.gt_count + b.gt_count);
        ++pairs;
      }
    }
    const double brute = double(sum / pairs);
    c.expect(std::fabs(*r.nmn - 1.0) <= 1e-9, "n=" + std::to_string(n) + " NMN " + num(*r.nmn));
    c.expect(r.pccn == 0.0, "n=" + std::to_string(n) + " PCCN " + num(*r.pccn));
    c.expect(rel_close(*r.cnt_p, brute, 1e-12), "n=" + std::to_string(n) + " CntP " + num(*r.cnt_p) + " vs " + num(brute));
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.expect(seconds < 1.0, "runtime " + num(seconds) + " s");
  return c;
}

Check worked_example() {
  Check c;
  const CountTally t = tp_fp_fn(20, 3, 15);
  c.expect(t.tp == 15 && t.fp == 8 && t.fn == 0, "tally (" + num(t.tp) + ", " + num(t.fp) + ", " + num(t.fn) + ")");
  const double p = mosaic_precision(20, 3, 15);
  c.expect(p == 15.0 / 23.0 && p * 23.0 == 15.0, "precision " + num(p));
  c.expect(mosaic_recall(20, 15) == 1.0, "recall");
  const auto exact = testing::oracle_exact_tally(20, 3, 15);
  c.expect(exact.precision == testing::Rational{15, 23} && exact.recall == testing::Rational{1, 1}, "rational oracle");
  c.expect(exact.tp == 15 && exact.fp == 8 && exact.fn == 0, "integer oracle tally");
  return c;
}

Check equivalence_property() {
  Check c;
  CounterRng rng(16);
  for (int i = 0; i < 10000; ++i) {
    // Quarter-unit counts keep every sum exactly representable.
    const double c_pos = double(rng.below(4001)) / 4.0;
    const double c_neg = double(rng.below(4001)) / 4.0;
    const double gt = double(1 + rng.below(1000));
    const CountTally t = tp_fp_fn(c_pos, c_neg, gt);
    const std::string at = "(" + num(c_pos) + ", " + num(c_neg) + ", " + num(gt) + ")";
    c.expect(mosaic_precision_piecewise(c_pos, c_neg, gt) == mosaic_precision(c_pos, c_neg, gt), "precision " + at);
    c.expect(mosaic_recall_piecewise(c_pos, gt) == mosaic_recall(c_pos, gt), "recall " + at);
    c.expect(t.tp + t.fn == gt, "tp+fn " + at);
    c.expect(t.tp + t.fp == c_pos + c_neg, "tp+fp " + at);
  }
  return c;
}

Check oracle_equivalence() {
  Check c;
  testing::TempDir dir;
  CounterRng rng(404);
  auto close = [&](const std::optional<double>& lib, const std::optional<double>& oracle, const std::string& what) {
    c.expect(lib.has_value() && oracle.has_value() && rel_close(*lib, *oracle, 1e-12),
             what + " " + (lib ? num(*lib) : "unset") + " vs " + (oracle ? num(*oracle) : "unset"));
  };
  for (int trial = 0; trial < 100; ++trial) {
    const Manifest m = testing::random_manifest(rng, 4, 3, 30);
    PlanConfig cfg;
    if (trial % 2 == 1) {
      cfg.mode = PlanMode::sampled;
      cfg.negatives_per_image = 2;
      cfg.seed = std::uint64_t(trial);
    }
    const Plan neg = negative_plan(m, cfg), mos = mosaic_plan(m, cfg);
    // Counts sit on a quarter-unit grid so that PCCN ties are exact in both
    // implementations; the strict comparison would otherwise hinge on rounding.
    std::vector<PredictionRecord> neg_records, mos_records;
    for (const auto& j : neg.negative) {
      neg_records.push_back(PredictionRecord::with_count(key_of(j), double(rng.below(160)) / 4.0));
    }
    for (const auto& j : mos.mosaic) {
      mos_records.push_back(PredictionRecord::with_split(key_of(j), double(rng.below(160)) / 4.0,
                                                         rng.uniform() < 0.2 ? 0.0 : rng.uniform() * 20));
    }
    const Scored s = load_both(dir.path(), m, neg, mos, neg_records, mos_records);
    const MetricsReport r = evaluate(&s.negative.negative, &s.mosaic.mosaic);
    const auto on = testing::oracle_negative(m, neg_records);
    const auto om = testing::oracle_mosaic(m, mos_records);
    const std::string tag = (trial % 2 ? "sampled" : "full") + std::string(" trial ") + std::to_string(trial) + " ";
    close(r.nmn, on.nmn, tag + "NMN");
    close(r.pccn, on.pccn, tag + "PCCN");
    close(r.mae, on.mae, tag + "MAE");
    close(r.rmse, on.rmse, tag + "RMSE");
    close(r.cnt_p, om.cnt_p, tag + "CntP");
    close(r.cnt_r, om.cnt_r, tag + "CntR");
    close(r.cnt_f1, om.cnt_f1_per_mosaic, tag + "CntF1");
    close(r.cnt_f1_aggregate, om.cnt_f1_aggregate, tag + "CntF1 aggregate");
  }
  return c;
}

Check density_consistency() {
  Check c;
  testing::TempDir dir;
  const Manifest m = testing::distinct_class_manifest(5);
  for (const char* model : {"perfect", "prompt_blind", "constant:2.75", "noisy_perfect:1.3:9", "class_confuser:0.4"}) {
    const SyntheticKind kind = parse_synthetic_kind(model);
    const MetricsReport counts = evaluate_model(dir / "counts", m, {kind, CountsEmission{}});
    const MetricsReport density = evaluate_model(dir / "density", m, {kind, DensityEmission{32, 24}});
    const std::pair<const char*, std::optional<double> MetricsReport::*> fields[] = {
        {"NMN", &MetricsReport::nmn},   {"PCCN", &MetricsReport::pccn}, {"CntP", &MetricsReport::cnt_p},
        {"CntR", &MetricsReport::cnt_r}, {"CntF1", &MetricsReport::cnt_f1}, {"MAE", &MetricsReport::mae},
        {"RMSE", &MetricsReport::rmse}};
    for (const auto& [name, field] : fields) {
      const double a = *(counts.*field), b = *(density.*field);
      c.expect(std::fabs(a - b) <= 1e-4, std::string(model) + " " + name + " " + num(a) + " vs " + num(b));
    }
  }

  CounterRng rng(61);
  for (int trial = 0; trial < 200; ++trial) {
    const std::uint32_t h = 1 + std::uint32_t(rng.below(64)), w = 1 + std::uint32_t(rng.below(64));
    const Point p{rng.uniform() * w, rng.uniform() * h};
    const double sigma = 0.1 + rng.uniform() * 8;
    const DensityMap d = render_from_points(std::vector<Point>{p}, h, w, GaussianKernel{sigma});
    long double mass = 0;
    for (float v : d.values) mass += v;
    c.expect(std::fabs(double(mass) - 1.0) <= 1e-6, "point mass " + num(double(mass)) + " sigma " + num(sigma));
  }

  for (int trial = 0; trial < 1000; ++trial) {
    DensityMap d(1 + std::uint32_t(rng.below(24)), 1 + std::uint32_t(rng.below(24)));
    for (auto& v : d.values) {
      const auto bits = std::uint32_t(rng.next());
      v = std::bit_cast<float>((bits & 0x7f800000u) == 0x7f800000u ? bits & 0x807fffffu : bits);
    }
    const auto bytes = encode_dmap(d);
    const DensityMap back = decode_dmap(bytes);
    bool same = back.height == d.height && back.width == d.width;
    for (std::size_t i = 0; same && i < d.values.size(); ++i) {
      same = std::bit_cast<std::uint32_t>(back.values[i]) == std::bit_cast<std::uint32_t>(d.values[i]);
    }
    c.expect(same && encode_dmap(back) == bytes, "round trip " + std::to_string(trial));
  }
  return c;
}

// Runs the full command pipeline in dir and returns every output file by
// relative path.
std::map<std::string, std::string> pipeline_outputs(const fs::path& dir, const Manifest& m, const std::string& threads,
                                                    Check& c) {
  const std::string manifest = testing::write_fixture(dir, m).string();
  auto run = [&](std::vector<std::string> args) {
    args.insert(args.begin(), {"--threads", threads});
    const auto r = testing::run_cli(args);
    c.expect(r.code == 0, args[2] + " exited " + std::to_string(r.code) + ": " + r.err);
  };
  const auto p = [&](const std::string& name) { return (dir / name).string(); };
  run({"plan", "--manifest", manifest, "--test", "negative", "--mode", "sampled", "--negatives-per-image", "3",
       "--seed", "17", "--out", p("neg.jsonl")});
  run({"plan", "--manifest", manifest, "--test", "mosaic", "--out", p("mos.jsonl")});
  run({"compose", "--manifest", manifest, "--plan", p("mos.jsonl"), "--out-dir", p("mosaics")});
  run({"simulate", "--manifest", manifest, "--plan", p("neg.jsonl"), "--model", "noisy_perfect:2:5", "--out",
       p("pn.jsonl")});
  run({"simulate", "--manifest", manifest, "--plan", p("mosaics/plan.jsonl"), "--model", "noisy_perfect:2:5",
       "--density", "40x30", "--out", p("pm.jsonl")});
  run({"score", "--manifest", manifest, "--plan", p("neg.jsonl"), "--predictions", p("pn.jsonl"), "--plan",
       p("mosaics/plan.jsonl"), "--predictions", p("pm.jsonl"), "--out-report", p("report.json"), "--raw-out",
       p("raw.jsonl")});
  run({"score", "--manifest", manifest, "--plan", p("neg.jsonl"), "--predictions", p("pn.jsonl"), "--plan",
       p("mosaics/plan.jsonl"), "--predictions", p("pm.jsonl"), "--out-report", p("report.md")});

  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).generic_string()] = testing::read_file(e.path());
  }
  return files;
}

Check determinism() {
  Check c;
  CounterRng rng(3);
  const Manifest m = testing::random_manifest(rng, 10, 5, 25);
  testing::TempDir a, b, d;
  const auto first = pipeline_outputs(a.path(), m, "1", c);
  const auto second = pipeline_outputs(b.path(), m, "1", c);
  const auto wide = pipeline_outputs(d.path(), m, "4", c);
  c.expect(first.size() > 100, "only " + std::to_string(first.size()) + " output files");
  c.expect(first == second, "two runs differ");
  c.expect(first == wide, "1 and 4 threads differ");
  for (const auto& [name, bytes] : first) {
    auto it = wide.find(name);
    if (it == wide.end() || it->second != bytes) c.expect(false, "differs: " + name);
  }
  return c;
}

Check table_format() {
  Check c;
  testing::TempDir dir;
  const fs::path golden = COUNTBENCH_GOLDEN_DIR;
  const Manifest m = testing::distinct_class_manifest(3);
  std::vector<MetricsReport> reports;
  for (const char* model : {"perfect", "prompt_blind"}) {
    MetricsReport r = evaluate_model(dir.path(), m, {parse_synthetic_kind(model), CountsEmission{}});
    r.model = model;
    r.n_jobs_scored = 15;
    r.config_fingerprint = "golden";
    reports.push_back(std::move(r));
  }
  const std::string md = io::format_report(reports, io::ReportFormat::markdown);
  const std::string csv = io::format_report(reports, io::ReportFormat::csv);
  c.expect(md == io::read_text(golden / "report_synthetic.md"), "markdown differs from golden");
  c.expect(csv == io::read_text(golden / "report_synthetic.csv"), "csv differs from golden");
  c.expect(md.rfind("| Method | NMN ↓ | PCCN ↑ | CntP ↑ | CntR ↑ | CntF1 ↑ | MAE ↓ | RMSE ↓ |\n", 0) == 0,
           "markdown header");
  c.expect(md.find("| prompt_blind | 1.00 | 0.00 | 0.500 | 1.000 | 0.654 | 0.00 | 0.00 |") != std::string::npos,
           "prompt_blind row");
  return c;
}

}  // namespace
}  // namespace countbench

int main() {
  using namespace countbench;
  const std::pair<const char*, std::function<Check()>> criteria[] = {
      {"ideal configuration: perfect model scores ideal metrics in under 1 s", ideal_configuration},
      {"prompt-blind closed form: NMN 1, PCCN 0, CntP matches brute force", prompt_blind_closed_form},
      {"over-count example: tally (20, 3, 15) and exact precision 15/23", worked_example},
      {"equivalence property: piecewise forms and tally identities on 10000 triples", equivalence_property},
      {"oracle equivalence: full and sampled plans on 4-image manifests to 1e-12", oracle_equivalence},
      {"density pipeline: maps match counts to 1e-4, point mass to 1e-6, 1000 DMAP round trips", density_consistency},
      {"determinism: identical outputs across runs and thread counts 1 and 4", determinism},
      {"table format: columns and rounding match the golden tables", table_format},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Check c;
    try {
      c = fn();
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    if (c.failed()) {
      ++failed;
      std::printf("FAIL %s: %s\n", name, c.detail().c_str());
    } else {
      std::printf("PASS %s\n", name);
    }
  }
  std::printf("%d of %zu criteria passed\n", int(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
