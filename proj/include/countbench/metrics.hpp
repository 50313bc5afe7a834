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

#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "countbench/core.hpp"

namespace countbench {

// Negative-label test outcome of one image: the count under its own class
// prompt and the counts under every scored negative prompt.
struct ImageNegatives {
  std::string image_id;
  double gt = 0.0;
  double positive = 0.0;
  std::vector<std::pair<std::string, double>> negatives;  // (prompt_class, count)
};

struct NegativeScoredSet {
  std::vector<ImageNegatives> images;
};

struct MosaicPairScore {
  std::string pos_image_id;
  std::string neg_image_id;
  double c_pos = 0.0;
  double c_neg = 0.0;
  double gt = 0.0;  // ground truth of the positive image
};

struct MosaicScoredSet {
  std::vector<MosaicPairScore> pairs;
};

// Mean over images of (mean negative count / gt).
double nmn(const NegativeScoredSet& s);

// Percentage of images whose positive-prompt count is strictly nearer the
// ground truth than the mean of their negative-prompt counts.
double pccn(const NegativeScoredSet& s);

struct CountTally {
  double tp = 0.0;
  double fp = 0.0;
  double fn = 0.0;
};

// TP/FP/FN of one mosaic: the top half contributes at most gt true
// positives, the excess and the whole bottom half are false positives.
CountTally tp_fp_fn(double c_pos, double c_neg, double gt);

// Per-mosaic precision min(c_pos, gt) / (c_pos + c_neg); 1 when nothing is
// predicted. Recall min(c_pos, gt) / gt.
double mosaic_precision(double c_pos, double c_neg, double gt);
double mosaic_recall(double c_pos, double gt);

// The same quantities written as the two-branch case split on c_pos < gt.
double mosaic_precision_piecewise(double c_pos, double c_neg, double gt);
double mosaic_recall_piecewise(double c_pos, double gt);

struct PrecisionRecall {
  double cnt_p = 0.0;
  double cnt_r = 0.0;
};

PrecisionRecall cnt_precision_recall(const MosaicScoredSet& s);

// Harmonic mean, 0 when p + r == 0.
double cnt_f1(double p, double r);

struct MosaicMetrics {
  double cnt_p = 0.0;
  double cnt_r = 0.0;
  double cnt_f1_per_mosaic = 0.0;
  double cnt_f1_aggregate = 0.0;
};

MosaicMetrics mosaic_metrics(const MosaicScoredSet& s);

struct CountErrors {
  double mae = 0.0;
  double rmse = 0.0;
};

// (predicted, ground truth) pairs.
CountErrors mae_rmse(std::span<const std::pair<double, double>> pairs);

// Correct-count drift |c_pos_ij - c_ii| / c_ii over every mosaic pair.
DriftSummary drift_stats(const std::unordered_map<std::string, double>& positive_counts, const MosaicScoredSet& s);

// Summary of raw drift values (exposed for testing and plotting).
DriftSummary summarize_drift(std::span<const double> values, std::span<const MosaicPairScore* const> pairs);

// All applicable metrics for the tests that were run.
MetricsReport evaluate(const NegativeScoredSet* negative, const MosaicScoredSet* mosaic);

}  // namespace countbench
