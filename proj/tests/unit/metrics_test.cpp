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

#include <cmath>

#include <gtest/gtest.h>

#include "countbench/errors.hpp"
#include "countbench/metrics.hpp"
#include "countbench/rng.hpp"
#include "oracles.hpp"

namespace countbench {
namespace {

// Counts on a grid of quarter units, exactly representable along with their
// sums, so algebraic identities can be checked with ==.
double dyadic_count(CounterRng& r, std::uint64_t max_units = 4000) { return double(r.below(max_units + 1)) / 4.0; }

ImageNegatives image(std::string id, double gt, double positive, std::vector<double> negatives) {
  ImageNegatives img{std::move(id), gt, positive, {}};
  for (std::size_t j = 0; j < negatives.size(); ++j) img.negatives.emplace_back("p" + std::to_string(j), negatives[j]);
  return img;
}

TEST(Nmn, PerfectModelIsZero) {
  const NegativeScoredSet s{{image("a", 5, 5, {0, 0}), image("b", 7, 7, {0, 0})}};
  EXPECT_EQ(nmn(s), 0.0);
}

TEST(Nmn, PromptBlindModelIsExactlyOne) {
  NegativeScoredSet s;
  for (int i = 0; i < 5; ++i) {
    const double gt = 3 + 2 * i;
    s.images.push_back(image("i" + std::to_string(i), gt, gt, {gt, gt, gt, gt}));
  }
  EXPECT_EQ(nmn(s), 1.0);
}

TEST(Nmn, SingleImageAveragesItsNegatives) {
  EXPECT_EQ(nmn({{image("a", 10, 10, {4, 6})}}), 0.5);
}

TEST(Nmn, ErrorsOnEmptySetMissingNegativesOrZeroGroundTruth) {
  EXPECT_THROW(nmn({}), InputError);
  EXPECT_THROW(nmn({{image("a", 10, 10, {})}}), InputError);
  EXPECT_THROW(nmn({{image("a", 0, 0, {1})}}), InputError);
}

TEST(Nmn, InvariantUnderJointScalingOfGroundTruthAndNegatives) {
  CounterRng r(12);
  for (int trial = 0; trial < 200; ++trial) {
    NegativeScoredSet a, b;
    for (int i = 0; i < 4; ++i) {
      const double gt = double(1 + r.below(50));
      std::vector<double> negs(1 + r.below(5));
      for (auto& v : negs) v = double(r.below(40));
      a.images.push_back(image("i", gt, gt, negs));
      // Power-of-two factors keep the scaling exact.
      const double k = std::ldexp(1.0, int(r.below(8)) - 3);
      for (auto& v : negs) v *= k;
      b.images.push_back(image("i", gt * k, gt * k, negs));
    }
    EXPECT_EQ(nmn(a), nmn(b));
  }
}

TEST(Pccn, PerfectModelScoresHundred) {
  EXPECT_EQ(pccn({{image("a", 5, 5, {0, 0}), image("b", 7, 7, {0})}}), 100.0);
}

TEST(Pccn, PromptBlindTiesScoreZero) {
  EXPECT_EQ(pccn({{image("a", 5, 5, {5, 5}), image("b", 7, 7, {7})}}), 0.0);
}

TEST(Pccn, PositiveNearerThanNegativeMean) {
  EXPECT_EQ(pccn({{image("a", 10, 9, {14, 16})}}), 100.0);
  EXPECT_EQ(pccn({{image("a", 10, 9, {11}), image("b", 10, 10, {0})}}), 50.0);
}

TEST(TpFpFn, OverCountWithNegativeSpill) {
  const CountTally t = tp_fp_fn(20, 3, 15);
  EXPECT_EQ(t.tp, 15.0);
  EXPECT_EQ(t.fp, 8.0);
  EXPECT_EQ(t.fn, 0.0);
  EXPECT_EQ(mosaic_precision(20, 3, 15), 15.0 / 23.0);
  EXPECT_EQ(mosaic_recall(20, 15), 1.0);
  const auto exact = testing::oracle_exact_tally(20, 3, 15);
  EXPECT_EQ(exact.precision, (testing::Rational{15, 23}));
  EXPECT_EQ(exact.recall, (testing::Rational{1, 1}));
}

TEST(TpFpFn, UnderCountAndZeroCases) {
  const CountTally under = tp_fp_fn(3, 0, 15);
  EXPECT_EQ(under.tp, 3.0);
  EXPECT_EQ(under.fp, 0.0);
  EXPECT_EQ(under.fn, 12.0);
  const CountTally zero = tp_fp_fn(0, 0, 5);
  EXPECT_EQ(zero.tp, 0.0);
  EXPECT_EQ(zero.fp, 0.0);
  EXPECT_EQ(zero.fn, 5.0);
}

TEST(TpFpFn, IdentitiesHoldExactlyOnRandomTriples) {
  CounterRng r(99);
  for (int i = 0; i < 10000; ++i) {
    const double c_pos = dyadic_count(r), c_neg = dyadic_count(r), gt = double(1 + r.below(1000));
    const CountTally t = tp_fp_fn(c_pos, c_neg, gt);
    ASSERT_EQ(t.tp + t.fn, gt);
    ASSERT_EQ(t.tp + t.fp, c_pos + c_neg);
    ASSERT_GE(t.tp, 0.0);
    ASSERT_GE(t.fp, 0.0);
    ASSERT_GE(t.fn, 0.0);
  }
}

TEST(TpFpFn, AgreesWithIntegerOracle) {
  CounterRng r(98);
  for (int i = 0; i < 5000; ++i) {
    const long long c_pos = (long long)r.below(100), c_neg = (long long)r.below(100), gt = 1 + (long long)r.below(100);
    const CountTally t = tp_fp_fn(double(c_pos), double(c_neg), double(gt));
    const auto o = testing::oracle_exact_tally(c_pos, c_neg, gt);
    ASSERT_EQ(t.tp, double(o.tp));
    ASSERT_EQ(t.fp, double(o.fp));
    ASSERT_EQ(t.fn, double(o.fn));
  }
}

TEST(PiecewiseForms, EqualMinFormsExactly) {
  CounterRng r(100);
  for (int i = 0; i < 10000; ++i) {
    const double c_pos = r.uniform() < 0.05 ? 0.0 : r.uniform() * 200;
    const double c_neg = r.uniform() < 0.05 ? 0.0 : r.uniform() * 200;
    const double gt = double(1 + r.below(150));
    ASSERT_EQ(mosaic_precision_piecewise(c_pos, c_neg, gt), mosaic_precision(c_pos, c_neg, gt));
    ASSERT_EQ(mosaic_recall_piecewise(c_pos, gt), mosaic_recall(c_pos, gt));
  }
}

TEST(CntPrecisionRecall, OverCountWithNegativeSpill) {
  const auto pr = cnt_precision_recall({{{"p", "n", 20, 3, 15}}});
  EXPECT_EQ(pr.cnt_p, 15.0 / 23.0);
  EXPECT_EQ(pr.cnt_r, 1.0);
}

TEST(CntPrecisionRecall, PerfectAndZeroModels) {
  const auto perfect = cnt_precision_recall({{{"a", "b", 4, 0, 4}, {"b", "a", 9, 0, 9}}});
  EXPECT_EQ(perfect.cnt_p, 1.0);
  EXPECT_EQ(perfect.cnt_r, 1.0);
  const auto zero = cnt_precision_recall({{{"a", "b", 0, 0, 4}, {"b", "a", 0, 0, 9}}});
  EXPECT_EQ(zero.cnt_p, 1.0);
  EXPECT_EQ(zero.cnt_r, 0.0);
  EXPECT_EQ(mosaic_metrics({{{"a", "b", 0, 0, 4}}}).cnt_f1_per_mosaic, 0.0);
}

TEST(CntPrecisionRecall, EmptySetIsAnError) { EXPECT_THROW(cnt_precision_recall({}), InputError); }

TEST(CntPrecisionRecall, MonotoneInEachCount) {
  CounterRng r(7);
  for (int trial = 0; trial < 300; ++trial) {
    MosaicScoredSet s;
    for (int i = 0; i < 6; ++i) s.pairs.push_back({"a", "b", r.uniform() * 30, r.uniform() * 30, double(1 + r.below(25))});
    const auto base = cnt_precision_recall(s);
    const std::size_t k = r.below(6);
    MosaicScoredSet more_pos = s, more_neg = s;
    more_pos.pairs[k].c_pos += r.uniform() * 10;
    more_neg.pairs[k].c_neg += r.uniform() * 10;
    EXPECT_GE(cnt_precision_recall(more_pos).cnt_r, base.cnt_r);
    EXPECT_LE(cnt_precision_recall(more_neg).cnt_p, base.cnt_p);
  }
}

TEST(CntF1, HarmonicMean) {
  EXPECT_EQ(cnt_f1(1.0, 1.0), 1.0);
  EXPECT_EQ(cnt_f1(0.0, 1.0), 0.0);
  EXPECT_EQ(cnt_f1(0.0, 0.0), 0.0);
  EXPECT_NEAR(cnt_f1(0.843, 0.799), 0.8204, 5e-4);
}

TEST(CntF1, BoundedByTwiceTheSmallerTerm) {
  CounterRng r(5);
  for (int i = 0; i < 1000; ++i) {
    const double p = r.uniform(), rec = r.uniform();
    EXPECT_LE(cnt_f1(p, rec), 2 * std::min(p, rec));
  }
}

TEST(MaeRmse, SmallExamples) {
  const std::vector<std::pair<double, double>> two{{10, 10}, {12, 10}};
  const CountErrors e = mae_rmse(two);
  EXPECT_EQ(e.mae, 1.0);
  EXPECT_EQ(e.rmse, std::sqrt(2.0));
  const std::vector<std::pair<double, double>> perfect{{3, 3}, {4, 4}};
  EXPECT_EQ(mae_rmse(perfect).mae, 0.0);
  EXPECT_EQ(mae_rmse(perfect).rmse, 0.0);
  const std::vector<std::pair<double, double>> one{{0, 10}};
  EXPECT_EQ(mae_rmse(one).mae, 10.0);
  EXPECT_EQ(mae_rmse(one).rmse, 10.0);
  EXPECT_THROW(mae_rmse({}), InputError);
}

TEST(MaeRmse, RmseNeverBelowMae) {
  CounterRng r(1);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<std::pair<double, double>> pairs(1 + r.below(20));
    const double common = r.uniform() * 100;
    for (auto& p : pairs) p = {r.uniform() < 0.5 ? common : r.uniform() * 100, 0.0};
    const CountErrors e = mae_rmse(pairs);
    EXPECT_GE(e.rmse, e.mae);
  }
}

TEST(Drift, PromptBlindHasNoDrift) {
  const MosaicScoredSet s{{{"a", "b", 5, 7, 5}, {"b", "a", 7, 5, 7}}};
  const DriftSummary d = drift_stats({{"a", 5}, {"b", 7}}, s);
  EXPECT_EQ(d.n, 2u);
  EXPECT_EQ(d.mean, 0.0);
  EXPECT_TRUE(d.outliers.empty());
}

TEST(Drift, SinglePairArithmetic) {
  const DriftSummary d = drift_stats({{"a", 10}}, {{{"a", "b", 12, 0, 10}}});
  EXPECT_NEAR(d.mean, 0.2, 1e-15);
  EXPECT_EQ(d.median, d.mean);
}

TEST(Drift, ConstantBiasGivesKOverCii) {
  const double k = 3.0;
  MosaicScoredSet s;
  std::unordered_map<std::string, double> cii;
  for (int i = 0; i < 6; ++i) {
    const std::string id = "i" + std::to_string(i);
    cii[id] = 2.0 + i;
    s.pairs.push_back({id, "x", cii[id] + k, 0, 1});
  }
  const DriftSummary d = drift_stats(cii, s);
  std::vector<double> expected;
  for (int i = 0; i < 6; ++i) expected.push_back(k / (2.0 + i));
  const auto o = testing::oracle_drift(expected);
  EXPECT_NEAR(d.mean, o.mean, 1e-15);
  EXPECT_NEAR(d.median, o.median, 1e-15);
  EXPECT_NEAR(d.q1, o.q1, 1e-15);
  EXPECT_NEAR(d.q3, o.q3, 1e-15);
}

TEST(Drift, ZeroOrMissingReferenceIsSkipped) {
  const MosaicScoredSet s{{{"a", "b", 5, 0, 5}, {"z", "b", 1, 0, 5}, {"c", "b", 4, 0, 4}}};
  const DriftSummary d = drift_stats({{"a", 0.0}, {"c", 4.0}}, s);
  EXPECT_EQ(d.n, 1u);
  ASSERT_EQ(d.skipped.size(), 2u);
  EXPECT_EQ(d.skipped[0], (SkippedPair{"a", "b"}));
  EXPECT_EQ(d.skipped[1], (SkippedPair{"z", "b"}));
}

TEST(Drift, SummaryMatchesOracleOnRandomData) {
  CounterRng r(8);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> values(1 + r.below(40));
    for (auto& v : values) v = r.uniform() < 0.1 ? r.uniform() * 50 : r.uniform();
    std::vector<const MosaicPairScore*> none;
    const DriftSummary d = summarize_drift(values, none);
    const auto o = testing::oracle_drift(values);
    EXPECT_TRUE(testing::rel_close(d.mean, o.mean, 1e-12));
    EXPECT_TRUE(testing::rel_close(d.median, o.median, 1e-14));
    EXPECT_TRUE(testing::rel_close(d.q1, o.q1, 1e-14));
    EXPECT_TRUE(testing::rel_close(d.q3, o.q3, 1e-14));
    EXPECT_TRUE(testing::rel_close(d.whisker_low, o.whisker_low, 1e-14));
    EXPECT_TRUE(testing::rel_close(d.whisker_high, o.whisker_high, 1e-14));
    ASSERT_EQ(d.outliers.size(), o.outliers.size());
    EXPECT_LE(d.q1, d.median);
    EXPECT_LE(d.median, d.q3);
    for (const auto& out : d.outliers) EXPECT_TRUE(out.value < d.whisker_low || out.value > d.whisker_high);
  }
}

TEST(Evaluate, FillsOnlyMetricsOfTestsThatRan) {
  const NegativeScoredSet neg{{image("a", 5, 5, {0}), image("b", 7, 7, {0})}};
  const MetricsReport only_neg = evaluate(&neg, nullptr);
  EXPECT_TRUE(only_neg.nmn && only_neg.pccn && only_neg.mae && only_neg.rmse);
  EXPECT_FALSE(only_neg.cnt_p || only_neg.drift);
  EXPECT_EQ(only_neg.n_images, 2u);

  const MosaicScoredSet mos{{{"a", "b", 5, 0, 5}, {"b", "a", 7, 0, 7}}};
  const MetricsReport both = evaluate(&neg, &mos);
  EXPECT_EQ(both.cnt_f1, 1.0);
  ASSERT_TRUE(both.drift);
  EXPECT_EQ(both.drift->n, 2u);
  EXPECT_FALSE(both.notes.empty());
}

}  // namespace
}  // namespace countbench
