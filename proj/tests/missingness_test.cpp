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

#include "fairmiss/missingness.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include "gtest/gtest.h"
#include "test_util.hpp"

namespace fairmiss {
namespace {

using testing::normal;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

// Textbook EM, one row at a time, no standardisation. Used as an oracle.
struct NaiveEm {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
};

NaiveEm naive_em(const Eigen::MatrixXd& x, int iters) {
  const Eigen::Index n = x.rows(), p = x.cols();
  NaiveEm e{Eigen::VectorXd::Zero(p), Eigen::MatrixXd::Zero(p, p)};
  for (Eigen::Index j = 0; j < p; ++j) {
    double s = 0, s2 = 0, c = 0;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (std::isnan(x(r, j))) continue;
      s += x(r, j);
      s2 += x(r, j) * x(r, j);
      ++c;
    }
    e.mu(j) = s / c;
    e.sigma(j, j) = s2 / c - e.mu(j) * e.mu(j);
  }
  for (int it = 0; it < iters; ++it) {
    Eigen::VectorXd t1 = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd t2 = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index r = 0; r < n; ++r) {
      std::vector<Eigen::Index> o, m;
      for (Eigen::Index j = 0; j < p; ++j) (std::isnan(x(r, j)) ? m : o).push_back(j);
      Eigen::VectorXd xh(p);
      Eigen::MatrixXd c = Eigen::MatrixXd::Zero(p, p);
      for (auto j : o) xh(j) = x(r, j);
      if (!m.empty()) {
        Eigen::MatrixXd soo(o.size(), o.size()), smo(m.size(), o.size()), smm(m.size(), m.size());
        for (std::size_t a = 0; a < o.size(); ++a)
          for (std::size_t b = 0; b < o.size(); ++b) soo(a, b) = e.sigma(o[a], o[b]);
        for (std::size_t a = 0; a < m.size(); ++a)
          for (std::size_t b = 0; b < o.size(); ++b) smo(a, b) = e.sigma(m[a], o[b]);
        for (std::size_t a = 0; a < m.size(); ++a)
          for (std::size_t b = 0; b < m.size(); ++b) smm(a, b) = e.sigma(m[a], m[b]);
        Eigen::VectorXd dev(o.size());
        for (std::size_t a = 0; a < o.size(); ++a) dev(a) = x(r, o[a]) - e.mu(o[a]);
        Eigen::MatrixXd inv = o.empty() ? Eigen::MatrixXd(0, 0) : Eigen::MatrixXd(soo.inverse());
        Eigen::VectorXd cond_mean = smo * inv * dev;
        Eigen::MatrixXd cond_cov = smm - smo * inv * smo.transpose();
        for (std::size_t a = 0; a < m.size(); ++a) {
          xh(m[a]) = e.mu(m[a]) + (o.empty() ? 0.0 : cond_mean(a));
          for (std::size_t b = 0; b < m.size(); ++b) c(m[a], m[b]) = cond_cov(a, b);
        }
      }
      t1 += xh;
      t2 += xh * xh.transpose() + c;
    }
    e.mu = t1 / static_cast<double>(n);
    e.sigma = t2 / static_cast<double>(n) - e.mu * e.mu.transpose();
  }
  return e;
}

double naive_little_statistic(const Eigen::MatrixXd& x, const NaiveEm& e, std::size_t* dof) {
  std::map<std::vector<int>, std::vector<Eigen::Index>> groups;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    std::vector<int> key;
    for (Eigen::Index j = 0; j < x.cols(); ++j) key.push_back(std::isnan(x(r, j)));
    groups[key].push_back(r);
  }
  double d2 = 0;
  std::size_t sum_p = 0;
  for (const auto& [key, rows] : groups) {
    std::vector<Eigen::Index> o;
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      if (!key[j]) o.push_back(j);
    if (o.empty() || rows.size() < 2) continue;
    Eigen::VectorXd diff = Eigen::VectorXd::Zero(o.size());
    for (auto r : rows)
      for (std::size_t a = 0; a < o.size(); ++a) diff(a) += x(r, o[a]);
    diff /= static_cast<double>(rows.size());
    Eigen::MatrixXd s(o.size(), o.size());
    for (std::size_t a = 0; a < o.size(); ++a) {
      diff(a) -= e.mu(o[a]);
      for (std::size_t b = 0; b < o.size(); ++b) s(a, b) = e.sigma(o[a], o[b]);
    }
    d2 += static_cast<double>(rows.size()) * diff.dot(s.inverse() * diff);
    sum_p += o.size();
  }
  *dof = sum_p - static_cast<std::size_t>(x.cols());
  return d2;
}

// Correlated normal sample with MCAR masking.
Eigen::MatrixXd mcar_sample(Rng& rng, Eigen::Index n, Eigen::Index p, double miss, double rho = 0.5) {
  Eigen::MatrixXd x(n, p);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double common = normal(rng);
    for (Eigen::Index j = 0; j < p; ++j) {
      x(r, j) = 1.0 + j + std::sqrt(rho) * common + std::sqrt(1 - rho) * normal(rng);
    }
  }
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index j = 0; j < p; ++j)
      if (rng.uniform() < miss) x(r, j) = kNaN;
  return x;
}

TEST(MissingFraction, TenRowFixture) {
  std::vector<std::uint8_t> mask(10, 0);
  mask[1] = mask[4] = mask[7] = 1;
  std::vector<Column> cols;
  cols.push_back(Column::numeric("x", std::vector<double>(10, 1.0), mask));
  cols.push_back(Column::numeric("z", std::vector<double>(10, 2.0)));
  const auto f = missing_fraction_per_column(Dataset(std::move(cols)));
  ASSERT_EQ(f.size(), 2u);
  EXPECT_DOUBLE_EQ(f[0].fraction, 0.3);
  EXPECT_EQ(f[1].fraction, 0.0);
}

TEST(PatternTable, ThreePatternFixture) {
  // Patterns over (a, b): 10 x3, 01 x2, 11 x1, 00 x4.
  std::vector<std::uint8_t> ma{1, 1, 1, 0, 0, 1, 0, 0, 0, 0};
  std::vector<std::uint8_t> mb{0, 0, 0, 1, 1, 1, 0, 0, 0, 0};
  std::vector<Column> cols;
  cols.push_back(Column::numeric("a", std::vector<double>(10, 0.0), ma));
  cols.push_back(Column::numeric("b", std::vector<double>(10, 0.0), mb));
  cols.push_back(Column::numeric("full", std::vector<double>(10, 0.0)));
  const PatternTable t = pattern_table(Dataset(std::move(cols)));
  ASSERT_EQ(t.columns, (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(t.rows.size(), 4u);
  EXPECT_EQ(t.rows[0].pattern, (std::vector<std::uint8_t>{0, 0}));
  EXPECT_EQ(t.rows[0].count, 4u);
  EXPECT_EQ(t.rows[1].pattern, (std::vector<std::uint8_t>{1, 0}));
  EXPECT_EQ(t.rows[1].count, 3u);
  EXPECT_EQ(t.rows[2].pattern, (std::vector<std::uint8_t>{0, 1}));
  EXPECT_EQ(t.rows[2].count, 2u);
  EXPECT_EQ(t.rows[3].pattern, (std::vector<std::uint8_t>{1, 1}));
  EXPECT_EQ(t.rows[3].count, 1u);
}

TEST(PatternTable, FullyObserved) {
  const PatternTable t = pattern_table(testing::load_fixture("fully_observed"));
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_TRUE(t.rows[0].pattern.empty());
  EXPECT_EQ(t.rows[0].fraction, 1.0);
}

TEST(PatternTable, FractionsSumToOneProperty) {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(300);
    std::vector<Column> cols;
    for (int c = 0; c < 4; ++c) {
      std::vector<std::uint8_t> m(n);
      for (auto& v : m) v = rng.uniform() < 0.3;
      cols.push_back(Column::numeric("c" + std::to_string(c), std::vector<double>(n, 0.0), m));
    }
    const PatternTable t = pattern_table(Dataset(std::move(cols)));
    double f = 0;
    std::size_t count = 0;
    for (const auto& r : t.rows) {
      f += r.fraction;
      count += r.count;
    }
    EXPECT_NEAR(f, 1.0, 1e-12);
    EXPECT_EQ(count, n);
    std::set<std::vector<std::uint8_t>> distinct;
    for (const auto& r : t.rows) distinct.insert(r.pattern);
    EXPECT_EQ(distinct.size(), t.rows.size());
  }
}

TEST(Correlations, MissingnessEqualsUnprivileged) {
  const std::size_t n = 40;
  std::vector<std::string> g(n), y(n);
  std::vector<std::uint8_t> m(n);
  Rng rng(3);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = i % 3 ? "b" : "a";
    m[i] = g[i] == "b";
    y[i] = rng.uniform() < 0.5 ? "1" : "0";
  }
  std::vector<Column> cols;
  cols.push_back(Column::categorical_from_strings("group", g));
  cols.push_back(Column::numeric("x", std::vector<double>(n, 1.0), m));
  cols.push_back(Column::categorical_from_strings("y", y));
  const Dataset d(std::move(cols), std::string("y"));
  const CorrelationMatrix c = missingness_correlations(d, testing::ab_group());
  ASSERT_EQ(c.names, (std::vector<std::string>{"x_missing", "privileged", "favourable"}));
  EXPECT_NEAR(*c.values[0][1], -1.0, 1e-12);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(*c.values[i][i], 1.0);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(c.values[i][j], c.values[j][i]);
  }
}

TEST(Correlations, ConstantIndicatorIsUndefined) {
  const Dataset d = testing::group_label_dataset({"a", "b", "a"}, {"1", "1", "1"});
  const CorrelationMatrix c = missingness_correlations(d, testing::ab_group());
  ASSERT_EQ(c.names.size(), 2u);
  EXPECT_FALSE(c.values[1][1].has_value());
  EXPECT_FALSE(c.values[0][1].has_value());
  EXPECT_EQ(*c.values[0][0], 1.0);
}

TEST(EmMvn, CompleteDataIsClosedFormInOneIteration) {
  Rng rng(5);
  Eigen::MatrixXd x = mcar_sample(rng, 50, 3, 0.0);
  const EmResult e = em_mvn(x);
  EXPECT_EQ(e.iterations, 1u);
  EXPECT_TRUE(e.converged);
  const Eigen::VectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean.transpose();
  const Eigen::MatrixXd cov = centered.transpose() * centered / 50.0;
  EXPECT_LT((e.mean - mean).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((e.covariance - cov).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(EmMvn, MatchesNaiveOracle) {
  Rng rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXd x = mcar_sample(rng, 120, 4, 0.2);
    for (Eigen::Index r = 0; r < 4; ++r) x(r, 0) = 1.0 + r;  // keep every column observed
    EmOptions opt;
    opt.tol = 1e-14;
    opt.max_iter = 2000;
    const EmResult e = em_mvn(x, opt);
    const NaiveEm oracle = naive_em(x, 2000);
    EXPECT_LT((e.mean - oracle.mu).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT((e.covariance - oracle.sigma).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(EmMvn, BivariateRecoversGeneratingParameters) {
  Rng rng(7);
  const Eigen::Index n = 4000;
  Eigen::MatrixXd x(n, 2);
  // mean (2, -1), sd (1, 2), correlation 0.6
  for (Eigen::Index r = 0; r < n; ++r) {
    const double z1 = normal(rng), z2 = normal(rng);
    x(r, 0) = 2.0 + z1;
    x(r, 1) = -1.0 + 2.0 * (0.6 * z1 + 0.8 * z2);
    if (rng.uniform() < 0.2) x(r, rng.uniform() < 0.5 ? 0 : 1) = kNaN;
  }
  const EmResult e = em_mvn(x);
  EXPECT_TRUE(e.converged);
  // Three standard errors of the complete-data estimators, inflated for loss.
  const double se = 1.0 / std::sqrt(0.8 * n);
  EXPECT_NEAR(e.mean(0), 2.0, 3 * se);
  EXPECT_NEAR(e.mean(1), -1.0, 3 * 2.0 * se);
  EXPECT_NEAR(e.covariance(0, 0), 1.0, 3 * std::sqrt(2.0) * se);
  EXPECT_NEAR(e.covariance(1, 1), 4.0, 3 * std::sqrt(2.0) * 4.0 * se);
  EXPECT_NEAR(e.covariance(0, 1), 1.2, 3 * std::sqrt(1.0 * 4.0 + 1.44) * se);
}

TEST(EmMvn, LoglikNonDecreasing) {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    // Monotone pattern: column j missing whenever column j-1 is.
    Eigen::MatrixXd x = mcar_sample(rng, 80 + rng.below(100), 4, 0.0);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const Eigen::Index from = 1 + static_cast<Eigen::Index>(rng.below(6));
      for (Eigen::Index j = from; j < 4; ++j) x(r, j) = kNaN;
    }
    EmOptions opt;
    opt.tol = 1e-12;
    const EmResult e = em_mvn(x, opt);
    for (std::size_t i = 1; i < e.loglik_trace.size(); ++i) {
      ASSERT_GE(e.loglik_trace[i], e.loglik_trace[i - 1] - 1e-9 * std::fabs(e.loglik_trace[i - 1]));
    }
  }
}

TEST(EmMvn, Errors) {
  Eigen::MatrixXd x(3, 2);
  x << 1, kNaN, 2, kNaN, 3, kNaN;
  try {
    em_mvn(x);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAllMissingColumn);
  }
  EXPECT_THROW(em_mvn(Eigen::MatrixXd::Ones(3, 1)), Error);
}

TEST(EmMvn, CollinearColumnsAreRidged) {
  Rng rng(9);
  Eigen::MatrixXd x = mcar_sample(rng, 60, 2, 0.0);
  Eigen::MatrixXd y(60, 3);
  y << x, x.col(0) * 2.0;
  y(0, 1) = kNaN;
  const EmResult e = em_mvn(y);
  EXPECT_TRUE(e.ridged);
}

TEST(LittleMcar, MatchesNaiveStatistic) {
  Rng rng(10);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::MatrixXd x = mcar_sample(rng, 150, 3, 0.15);
    EmOptions opt;
    opt.tol = 1e-14;
    opt.max_iter = 3000;
    const McarTestResult r = little_mcar_test(x, {}, opt);
    std::size_t dof = 0;
    const double d2 = naive_little_statistic(x, naive_em(x, 3000), &dof);
    EXPECT_NEAR(r.statistic, d2, 1e-6 * std::max(1.0, d2));
    EXPECT_EQ(r.dof, dof);
    const boost::math::chi_squared chi(static_cast<double>(dof));
    EXPECT_NEAR(r.p_value, boost::math::cdf(boost::math::complement(chi, r.statistic)), 1e-10 * r.p_value);
  }
}

TEST(LittleMcar, CompleteDataIsUndefined) {
  try {
    little_mcar_test(testing::load_fixture("fully_observed"), CategoricalEncoding::kOrdinal);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoMissingValues);
  }
}

TEST(LittleMcar, AffineRescalingInvariance) {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd x = mcar_sample(rng, 300, 4, 0.1);
    const McarTestResult a = little_mcar_test(x);
    const Eigen::Index j = static_cast<Eigen::Index>(rng.below(4));
    const double scale = 0.01 + 100 * rng.uniform(), shift = 50 * (rng.uniform() - 0.5);
    for (Eigen::Index r = 0; r < x.rows(); ++r) x(r, j) = x(r, j) * scale + shift;
    const McarTestResult b = little_mcar_test(x);
    EXPECT_NEAR(a.statistic, b.statistic, 1e-6 * a.statistic);
    EXPECT_EQ(a.dof, b.dof);
  }
}

TEST(LittleMcar, DetectsMarMechanism) {
  Rng rng(12);
  Eigen::MatrixXd x = mcar_sample(rng, 1000, 3, 0.0);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    if (x(r, 0) > 1.5) x(r, 2) = kNaN;
  }
  EXPECT_LT(little_mcar_test(x).p_value, 1e-6);
}

TEST(LittleMcar, SingletonPatternsAreDropped) {
  Rng rng(13);
  Eigen::MatrixXd x = mcar_sample(rng, 100, 3, 0.0);
  x(0, 0) = kNaN;                 // singleton pattern
  for (Eigen::Index r = 1; r < 30; ++r) x(r, 2) = kNaN;
  const McarTestResult res = little_mcar_test(x);
  EXPECT_EQ(res.dropped_patterns, 1u);
  EXPECT_EQ(res.n_patterns, 2u);
  EXPECT_EQ(res.dof, 2u);  // (3 + 2) - 3
  EXPECT_FALSE(res.warnings.empty());
}

TEST(LittleMcar, EncodingsOnMixedData) {
  const Dataset d = testing::load_fixture("five_rows");
  // Too little data to be informative; both encodings must still run or fail
  // with a library error.
  for (auto enc : {CategoricalEncoding::kOrdinal, CategoricalEncoding::kOneHot}) {
    try {
      const McarTestResult r = little_mcar_test(d, enc);
      EXPECT_GE(r.p_value, 0.0);
      EXPECT_LE(r.p_value, 1.0);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInsufficientPatternSize);
    }
  }
  const EncodedMatrix onehot = encode_for_mvn(d, CategoricalEncoding::kOneHot);
  const EncodedMatrix ordinal = encode_for_mvn(d, CategoricalEncoding::kOrdinal);
  EXPECT_EQ(ordinal.values.cols(), 3);
  EXPECT_GT(onehot.values.cols(), 2);
  EXPECT_TRUE(std::isnan(ordinal.values(1, 1)));
}

}  // namespace
}  // namespace fairmiss
