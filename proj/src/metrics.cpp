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

#include "countbench/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "countbench/errors.hpp"
#include "countbench/kernels.hpp"

namespace countbench {

namespace {

struct ImageTerms {
  double normalized_negative_mean = 0.0;
  bool positive_nearer = false;
};

ImageTerms image_terms(const ImageNegatives& img) {
  if (!(img.gt > 0.0)) throw InputError("image " + img.image_id + ": ground truth must be positive");
  if (img.negatives.empty()) throw InputError("image " + img.image_id + " has no negative predictions");
  std::vector<double> counts;
  counts.reserve(img.negatives.size());
  for (const auto& [prompt, c] : img.negatives) counts.push_back(c);
  const double mean_negative = kernels::pairwise_sum_serial(counts) / double(counts.size());
  const double d_pos = std::abs(img.positive - img.gt);
  const double d_neg = std::abs(mean_negative - img.gt);
  return {mean_negative / img.gt, d_pos < d_neg};
}

std::vector<ImageTerms> all_image_terms(const NegativeScoredSet& s) {
  if (s.images.empty()) throw InputError("negative scored set is empty");
  std::vector<ImageTerms> terms(s.images.size());
  std::exception_ptr failure;
  const auto n = std::ptrdiff_t(s.images.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      terms[i] = image_terms(s.images[i]);
    } catch (...) {
#pragma omp critical(countbench_metrics_error)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) {
    // Report the first offending image deterministically.
    for (const auto& img : s.images) image_terms(img);
    std::rethrow_exception(failure);
  }
  return terms;
}

double quantile_sorted(const std::vector<double>& v, double p) {
  const double pos = p * double(v.size() - 1);
  const auto lo = std::size_t(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - double(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

}  // namespace

double nmn(const NegativeScoredSet& s) {
  const auto terms = all_image_terms(s);
  std::vector<double> values(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i) values[i] = terms[i].normalized_negative_mean;
  return kernels::pairwise_sum(values) / double(values.size());
}

double pccn(const NegativeScoredSet& s) {
  const auto terms = all_image_terms(s);
  const auto hits = std::count_if(terms.begin(), terms.end(), [](const ImageTerms& t) { return t.positive_nearer; });
  return 100.0 * double(hits) / double(terms.size());
}

CountTally tp_fp_fn(double c_pos, double c_neg, double gt) {
  return {std::min(c_pos, gt), std::max(c_pos - gt, 0.0) + c_neg, std::max(gt - c_pos, 0.0)};
}

double mosaic_precision(double c_pos, double c_neg, double gt) {
  const double predicted = c_pos + c_neg;
  return predicted == 0.0 ? 1.0 : std::min(c_pos, gt) / predicted;
}

double mosaic_recall(double c_pos, double gt) { return std::min(c_pos, gt) / gt; }

double mosaic_precision_piecewise(double c_pos, double c_neg, double gt) {
  const double predicted = c_pos + c_neg;
  if (predicted == 0.0) return 1.0;
  if (c_pos < gt) return c_pos / predicted;
  return gt / predicted;
}

double mosaic_recall_piecewise(double c_pos, double gt) {
  if (c_pos < gt) return c_pos / gt;
  return 1.0;
}

double cnt_f1(double p, double r) {
  const double sum = p + r;
  return sum == 0.0 ? 0.0 : 2.0 * p * r / sum;
}

MosaicMetrics mosaic_metrics(const MosaicScoredSet& s) {
  if (s.pairs.empty()) throw InputError("mosaic scored set is empty");
  const std::size_t n = s.pairs.size();
  std::vector<double> c_pos(n), c_neg(n), gt(n);
  for (std::size_t i = 0; i < n; ++i) {
    const MosaicPairScore& p = s.pairs[i];
    if (!(p.gt > 0.0)) {
      throw InputError("mosaic (" + p.pos_image_id + ", " + p.neg_image_id + "): ground truth must be positive");
    }
    c_pos[i] = p.c_pos;
    c_neg[i] = p.c_neg;
    gt[i] = p.gt;
  }
  std::vector<double> precision(n), recall(n), f1(n);
  kernels::mosaic_terms({c_pos, c_neg, gt}, {precision, recall, f1});

  MosaicMetrics m;
  m.cnt_p = kernels::pairwise_sum(precision) / double(n);
  m.cnt_r = kernels::pairwise_sum(recall) / double(n);
  m.cnt_f1_per_mosaic = kernels::pairwise_sum(f1) / double(n);
  m.cnt_f1_aggregate = cnt_f1(m.cnt_p, m.cnt_r);
  return m;
}

PrecisionRecall cnt_precision_recall(const MosaicScoredSet& s) {
  const MosaicMetrics m = mosaic_metrics(s);
  return {m.cnt_p, m.cnt_r};
}

CountErrors mae_rmse(std::span<const std::pair<double, double>> pairs) {
  if (pairs.empty()) throw InputError("mae_rmse needs at least one prediction");
  std::vector<double> abs_err(pairs.size()), sq_err(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double e = pairs[i].first - pairs[i].second;
    abs_err[i] = std::abs(e);
    sq_err[i] = e * e;
  }
  const double n = double(pairs.size());
  CountErrors out{kernels::pairwise_sum(abs_err) / n, std::sqrt(kernels::pairwise_sum(sq_err) / n)};
  // Rounding can put rmse an ulp below mae when all errors are equal.
  out.rmse = std::max(out.rmse, out.mae);
  return out;
}

DriftSummary summarize_drift(std::span<const double> values, std::span<const MosaicPairScore* const> pairs) {
  DriftSummary out;
  out.n = values.size();
  if (values.empty()) return out;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  out.mean = kernels::pairwise_sum(values) / double(values.size());
  out.median = quantile_sorted(sorted, 0.5);
  out.q1 = quantile_sorted(sorted, 0.25);
  out.q3 = quantile_sorted(sorted, 0.75);
  const double iqr = out.q3 - out.q1;
  out.whisker_low = std::max(out.q1 - 1.5 * iqr, sorted.front());
  out.whisker_high = std::min(out.q3 + 1.5 * iqr, sorted.back());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < out.whisker_low || values[i] > out.whisker_high) {
      const MosaicPairScore* p = i < pairs.size() ? pairs[i] : nullptr;
      out.outliers.push_back({p ? p->pos_image_id : std::string{}, p ? p->neg_image_id : std::string{}, values[i]});
    }
  }
  return out;
}

DriftSummary drift_stats(const std::unordered_map<std::string, double>& positive_counts, const MosaicScoredSet& s) {
  std::vector<double> values;
  std::vector<const MosaicPairScore*> used;
  std::vector<SkippedPair> skipped;
  for (const MosaicPairScore& p : s.pairs) {
    auto it = positive_counts.find(p.pos_image_id);
    if (it == positive_counts.end() || !(it->second > 0.0)) {
      skipped.push_back({p.pos_image_id, p.neg_image_id});
      continue;
    }
    values.push_back(std::abs(p.c_pos - it->second) / it->second);
    used.push_back(&p);
  }
  DriftSummary out = summarize_drift(values, used);
  out.skipped = std::move(skipped);
  return out;
}

MetricsReport evaluate(const NegativeScoredSet* negative, const MosaicScoredSet* mosaic) {
  MetricsReport r;
  if (negative != nullptr) {
    r.nmn = nmn(*negative);
    r.pccn = pccn(*negative);
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(negative->images.size());
    for (const auto& img : negative->images) pairs.emplace_back(img.positive, img.gt);
    const CountErrors e = mae_rmse(pairs);
    r.mae = e.mae;
    r.rmse = e.rmse;
    r.n_images = negative->images.size();
  }
  if (mosaic != nullptr) {
    const MosaicMetrics m = mosaic_metrics(*mosaic);
    r.cnt_p = m.cnt_p;
    r.cnt_r = m.cnt_r;
    r.cnt_f1 = m.cnt_f1_per_mosaic;
    r.cnt_f1_aggregate = m.cnt_f1_aggregate;
    if (negative == nullptr) {
      std::vector<std::string> ids;
      for (const auto& p : mosaic->pairs) ids.push_back(p.pos_image_id);
      std::sort(ids.begin(), ids.end());
      r.n_images = std::uint64_t(std::unique(ids.begin(), ids.end()) - ids.begin());
    }
  }
  if (negative != nullptr && mosaic != nullptr) {
    std::unordered_map<std::string, double> positive_counts;
    for (const auto& img : negative->images) positive_counts.emplace(img.image_id, img.positive);
    r.drift = drift_stats(positive_counts, *mosaic);
  }
  r.notes = {
      "negative mean per image is taken over its scored negative prompts (N-1 in full mode)",
      "CntF1 column is the mean of per-mosaic F1; cnt_f1_aggregate is the harmonic mean of CntP and CntR",
      "per-mosaic precision is 1 when c_pos + c_neg = 0",
      "PCCN counts ties as failures",
  };
  return r;
}

}  // namespace countbench
