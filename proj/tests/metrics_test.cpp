// Copyright 2026 The fairmiss Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fairmiss/metrics.hpp"

#include "gtest/gtest.h"
#include "test_util.hpp"

namespace fairmiss {
namespace {

using testing::ab_group;
using testing::group_label_dataset;

Predictions as_predictions(const Dataset& d, const std::vector<std::string>& labels) {
  Predictions p;
  for (const auto& l : labels) p.labels.push_back(*d.label().level_code(l));
  return p;
}

Predictions constant_predictions(const Dataset& d, const std::string& label) {
  return as_predictions(d, std::vector<std::string>(d.n_rows(), label));
}

TEST(PositiveRate, SixRowFixture) {
  // Three privileged rows, two of them favourable.
  const Dataset d = group_label_dataset({"a", "a", "a", "b", "b", "b"}, {"1", "1", "0", "1", "0", "0"});
  EXPECT_DOUBLE_EQ(positive_rate(true_labels(d), d, ab_group(), Group::kPrivileged), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(positive_rate(true_labels(d), d, ab_group(), Group::kUnprivileged), 1.0 / 3.0);
}

TEST(PositiveRate, AllPositive) {
  const Dataset d = group_label_dataset({"a", "b", "a"}, {"1", "1", "1"});
  EXPECT_EQ(positive_rate(true_labels(d), d, ab_group(), Group::kPrivileged), 1.0);
  EXPECT_EQ(positive_rate(true_labels(d), d, ab_group(), Group::kUnprivileged), 1.0);
}

TEST(PositiveRate, EmptyGroup) {
  const Dataset d = group_label_dataset({"a", "a", "b"}, {"1", "0", "1"});
  const Dataset only_a = d.select_rows(std::vector<std::size_t>{0, 1});
  try {
    positive_rate(true_labels(only_a), only_a, ab_group(), Group::kUnprivileged);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyGroup);
  }
  EXPECT_THROW(spd(true_labels(only_a), only_a, ab_group()), Error);
}

TEST(Spd, EqualRatesGiveZero) {
  const Dataset d = group_label_dataset({"a", "a", "b", "b"}, {"1", "0", "1", "0"});
  EXPECT_EQ(spd(true_labels(d), d, ab_group()), 0.0);
}

TEST(DisparateImpact, Cases) {
  // Rates (0.8, 0.4).
  const Dataset d = group_label_dataset(
      {"a", "a", "a", "a", "a", "b", "b", "b", "b", "b"}, {"1", "1", "1", "1", "0", "1", "1", "0", "0", "0"});
  // Privileged 4/5 = 0.8; unprivileged 2/5 = 0.4.
  EXPECT_DOUBLE_EQ(disparate_impact(true_labels(d), d, ab_group()), 0.5);
  const Dataset eq = group_label_dataset({"a", "b"}, {"1", "1"});
  EXPECT_EQ(disparate_impact(true_labels(eq), eq, ab_group()), 1.0);
  const Dataset zero = group_label_dataset({"a", "b"}, {"0", "1"});
  try {
    disparate_impact(true_labels(zero), zero, ab_group());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUndefinedRatio);
  }
}

TEST(GroupConfusion, EightRowFixture) {
  //  row group truth pred  cell
  //   0    a    1     1    tp
  //   1    a    1     0    fn
  //   2    a    0     1    fp
  //   3    a    0     0    tn
  //   4    b    1     1    tp
  //   5    b    1     1    tp
  //   6    b    0     1    fp
  //   7    b    0     0    tn
  const Dataset d = group_label_dataset({"a", "a", "a", "a", "b", "b", "b", "b"},
                                        {"1", "1", "0", "0", "1", "1", "0", "0"});
  const Predictions p = as_predictions(d, {"1", "0", "1", "0", "1", "1", "1", "0"});
  const GroupConfusion gc = group_confusion(p, d, ab_group());
  EXPECT_EQ(gc.privileged, (ConfusionCounts{1, 1, 1, 1}));
  EXPECT_EQ(gc.unprivileged, (ConfusionCounts{2, 1, 1, 0}));
}

TEST(GroupConfusion, PerfectAndConstant) {
  const Dataset d = group_label_dataset({"a", "a", "b", "b", "b"}, {"1", "0", "1", "0", "0"});
  const Predictions perfect{std::vector<std::int32_t>(true_labels(d).begin(), true_labels(d).end()), {}};
  const GroupConfusion gc = group_confusion(perfect, d, ab_group());
  EXPECT_EQ(gc.privileged.fp + gc.privileged.fn + gc.unprivileged.fp + gc.unprivileged.fn, 0);
  const GroupConfusion all_pos = group_confusion(constant_predictions(d, "1"), d, ab_group());
  EXPECT_EQ(all_pos.privileged.tn + all_pos.privileged.fn + all_pos.unprivileged.tn + all_pos.unprivileged.fn, 0);
}

TEST(EqualOpportunity, Cases) {
  const Dataset d = group_label_dataset({"a", "a", "b", "b", "a", "b"}, {"1", "1", "1", "1", "0", "0"});
  const Predictions perfect{std::vector<std::int32_t>(true_labels(d).begin(), true_labels(d).end()), {}};
  EXPECT_EQ(equal_opportunity_difference(perfect, d, ab_group()), 0.0);
  // TPR privileged 2/2, unprivileged 1/2.
  const Predictions p = as_predictions(d, {"1", "1", "1", "0", "0", "0"});
  EXPECT_DOUBLE_EQ(equal_opportunity_difference(p, d, ab_group()), 0.5);
  const Dataset no_pos = group_label_dataset({"a", "b", "b"}, {"0", "1", "0"});
  try {
    equal_opportunity_difference(constant_predictions(no_pos, "1"), no_pos, ab_group());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUndefinedRate);
  }
}

TEST(AverageOdds, Cases) {
  // Privileged: 5 positives, 5 negatives; unprivileged the same.
  std::vector<std::string> groups, truth;
  for (int i = 0; i < 10; ++i) {
    groups.push_back("a");
    truth.push_back(i < 5 ? "1" : "0");
  }
  for (int i = 0; i < 10; ++i) {
    groups.push_back("b");
    truth.push_back(i < 5 ? "1" : "0");
  }
  const Dataset d = group_label_dataset(groups, truth);
  // TPR_a = 5/5, TPR_b = 3/5 (diff 0.4); FPR_a = 2/5, FPR_b = 1/5 (diff 0.2).
  std::vector<std::string> pred = {"1", "1", "1", "1", "1", "1", "1", "0", "0", "0",
                                   "1", "1", "1", "0", "0", "1", "0", "0", "0", "0"};
  const Predictions p = as_predictions(d, pred);
  EXPECT_NEAR(average_odds_difference(p, d, ab_group()), 0.3, 1e-15);
  const Predictions perfect{std::vector<std::int32_t>(true_labels(d).begin(), true_labels(d).end()), {}};
  EXPECT_EQ(average_odds_difference(perfect, d, ab_group()), 0.0);
  EXPECT_EQ(average_odds_difference(constant_predictions(d, "1"), d, ab_group()), 0.0);
}

TEST(Accuracy, Cases) {
  const Dataset d = group_label_dataset({"a", "b", "a", "b"}, {"1", "0", "0", "1"});
  const Predictions perfect{std::vector<std::int32_t>(true_labels(d).begin(), true_labels(d).end()), {}};
  EXPECT_EQ(accuracy(perfect, d), 1.0);
  EXPECT_EQ(accuracy(as_predictions(d, {"0", "1", "1", "0"}), d), 0.0);
  try {
    accuracy(Predictions{{0, 1}, {}}, d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLengthMismatch);
  }
}

TEST(FairnessReport, UndefinedComponentsAreEmpty) {
  const Dataset d = group_label_dataset({"a", "b", "b"}, {"0", "1", "0"});
  const FairnessReport r = evaluate_predictions(constant_predictions(d, "0"), d, ab_group());
  EXPECT_FALSE(r.di.has_value());   // privileged rate is zero
  EXPECT_FALSE(r.eod.has_value());  // privileged group has no positives
  EXPECT_FALSE(r.avg_odds.has_value());
  ASSERT_TRUE(r.accuracy.has_value());
  EXPECT_DOUBLE_EQ(*r.accuracy, 2.0 / 3.0);
}

TEST(FairnessReport, SpdMatchesRates) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Dataset d = testing::random_group_label_dataset(rng, 2 + rng.below(50));
    const FairnessReport r = audit_dataset(d, ab_group());
    EXPECT_NEAR(r.spd, r.group_positive_rates.first - r.group_positive_rates.second, 4e-16);
  }
}

TEST(GroupSpec, Validation) {
  const Dataset d = group_label_dataset({"a", "b"}, {"1", "0"});
  EXPECT_THROW(resolve_group(d, GroupSpec{"nope", {"a"}, "1"}), Error);
  EXPECT_THROW(resolve_group(d, GroupSpec{"group", {}, "1"}), Error);
  try {
    resolve_group(d, GroupSpec{"group", {"a", "b"}, "1"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyGroup);  // nobody left unprivileged
  }
  EXPECT_THROW(resolve_group(d, GroupSpec{"group", {"z"}, "1"}), Error);
  EXPECT_THROW(resolve_group(d, GroupSpec{"group", {"a"}, "maybe"}), Error);
  std::vector<Column> cols;
  cols.push_back(Column::categorical_from_strings("group", {"a", "b"}, {0, 1}));
  cols.push_back(Column::categorical_from_strings("y", {"1", "0"}));
  const Dataset masked(std::move(cols), std::string("y"));
  try {
    resolve_group(masked, ab_group());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidGroup);
  }
}

// Property tests over random fixtures.

TEST(SpdProperties, ClassSwapNegatesExactly) {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const Dataset d = testing::random_group_label_dataset(rng, 2 + rng.below(80), rng.uniform(), rng.uniform());
    const double plus = spd(true_labels(d), d, ab_group("1"));
    const double minus = spd(true_labels(d), d, ab_group("0"));
    ASSERT_EQ(minus, -plus);
  }
}

TEST(SpdProperties, GroupSwapNegatesExactly) {
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const Dataset d = testing::random_group_label_dataset(rng, 2 + rng.below(80), rng.uniform(), rng.uniform());
    const GroupSpec g = ab_group();
    ASSERT_EQ(spd(true_labels(d), d, g.swapped_groups(d)), -spd(true_labels(d), d, g));
  }
}

TEST(SpdProperties, ConstantClassifierIsFair) {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const Dataset d = testing::random_group_label_dataset(rng, 2 + rng.below(80), rng.uniform(), rng.uniform());
    const Predictions pos = constant_predictions(d, "1");
    const Predictions neg = constant_predictions(d, "0");
    ASSERT_EQ(spd(pos.labels, d, ab_group()), 0.0);
    ASSERT_EQ(spd(neg.labels, d, ab_group()), 0.0);
    ASSERT_EQ(disparate_impact(pos.labels, d, ab_group()), 1.0);
    EXPECT_THROW(disparate_impact(neg.labels, d, ab_group()), Error);
  }
}

TEST(SpdProperties, PerfectPredictorMatchesDataset) {
  Rng rng(6);
  for (int trial = 0; trial < 300; ++trial) {
    const Dataset d = testing::random_group_label_dataset(rng, 2 + rng.below(80));
    const Predictions perfect{std::vector<std::int32_t>(true_labels(d).begin(), true_labels(d).end()), {}};
    ASSERT_EQ(spd(perfect.labels, d, ab_group()), spd(true_labels(d), d, ab_group()));
  }
}

TEST(SpdProperties, DecompositionOverPartition) {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 4 + rng.below(100);
    Dataset d = testing::random_group_label_dataset(rng, n);
    std::vector<double> x(n);
    std::vector<std::uint8_t> m(n);
    for (std::size_t i = 0; i < n; ++i) m[i] = rng.uniform() < 0.3;
    std::vector<Column> cols = d.columns();
    cols.push_back(Column::numeric("x", x, m));
    d = Dataset(cols, std::string("y"));
    const auto parts = split_by_missingness(d);
    GroupTallies sum;
    for (const Dataset* part : {&parts.with_missing, &parts.without_missing}) {
      if (part->n_rows() == 0) continue;
      const GroupTallies t = group_tallies(true_labels(*part), *part, ab_group());
      sum.n_privileged += t.n_privileged;
      sum.n_unprivileged += t.n_unprivileged;
      sum.favourable_privileged += t.favourable_privileged;
      sum.favourable_unprivileged += t.favourable_unprivileged;
    }
    const double recombined = sum.rate(Group::kPrivileged) - sum.rate(Group::kUnprivileged);
    EXPECT_NEAR(spd(true_labels(d), d, ab_group()), recombined, 1e-15);
  }
}

}  // namespace
}  // namespace fairmiss
