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

#ifndef FAIRMISS_MISSINGNESS_HPP
#define FAIRMISS_MISSINGNESS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "fairmiss/csv.hpp"
#include "fairmiss/dataset.hpp"
#include "fairmiss/error.hpp"
#include "fairmiss/group.hpp"
#include "fairmiss/stats.hpp"

namespace fairmiss {

struct ColumnFraction {
  std::string column;
  double fraction = 0.0;
};

/// Masked fraction of every column, in column order.
inline std::vector<ColumnFraction> missing_fraction_per_column(const Dataset& d) {
  std::vector<ColumnFraction> out;
  out.reserve(d.n_columns());
  for (const auto& c : d.columns()) {
    const double f = d.n_rows() == 0 ? 0.0
                                     : static_cast<double>(c.missing_count()) / static_cast<double>(d.n_rows());
    out.push_back({c.name(), f});
  }
  return out;
}

struct PatternRow {
  std::vector<std::uint8_t> pattern;  // 1 = missing, over PatternTable::columns
  std::size_t count = 0;
  double fraction = 0.0;
};

struct PatternTable {
  std::vector<std::string> columns;  // columns with at least one masked cell
  std::vector<PatternRow> rows;      // descending count, ties by pattern
  std::size_t n_rows = 0;
};

inline PatternTable pattern_table(const Dataset& d) {
  PatternTable t;
  t.n_rows = d.n_rows();
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < d.n_columns(); ++i) {
    if (d.column(i).has_missing()) {
      cols.push_back(i);
      t.columns.push_back(d.column(i).name());
    }
  }
  std::map<std::vector<std::uint8_t>, std::size_t> counts;
  std::vector<std::uint8_t> key(cols.size());
  for (std::size_t r = 0; r < d.n_rows(); ++r) {
    for (std::size_t k = 0; k < cols.size(); ++k) key[k] = d.column(cols[k]).is_missing(r) ? 1 : 0;
    ++counts[key];
  }
  for (const auto& [pattern, count] : counts) {
    t.rows.push_back({pattern, count, static_cast<double>(count) / static_cast<double>(d.n_rows())});
  }
  std::stable_sort(t.rows.begin(), t.rows.end(),
                   [](const PatternRow& a, const PatternRow& b) { return a.count > b.count; });
  return t;
}

inline std::string pattern_table_csv(const PatternTable& t) {
  std::string out;
  for (const auto& c : t.columns) out += csv_escape(c) + ",";
  out += "count,fraction\n";
  for (const auto& row : t.rows) {
    for (auto m : row.pattern) out += m ? "1," : "0,";
    out += std::to_string(row.count) + "," + nlohmann::json(row.fraction).dump() + "\n";
  }
  return out;
}

inline void to_json(nlohmann::json& j, const PatternTable& t) {
  j = nlohmann::json{{"columns", t.columns}, {"n_rows", t.n_rows}, {"patterns", nlohmann::json::array()}};
  for (const auto& row : t.rows) {
    std::vector<int> bits(row.pattern.begin(), row.pattern.end());
    j["patterns"].push_back({{"missing", bits}, {"count", row.count}, {"fraction", row.fraction}});
  }
}

/// Pearson correlations between 0/1 indicators. Entries involving a
/// constant indicator are empty.
struct CorrelationMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<std::optional<double>>> values;
};

inline std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0 || syy <= 0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Indicators: `<col>_missing` for each feature with masked cells, then
/// `privileged` and `favourable`.
inline CorrelationMatrix missingness_correlations(const Dataset& d, const GroupSpec& g) {
  const GroupFrame frame = resolve_group(d, g);
  CorrelationMatrix m;
  std::vector<std::vector<double>> ind;
  for (auto i : d.feature_indices()) {
    const Column& c = d.column(i);
    if (!c.has_missing()) continue;
    m.names.push_back(c.name() + "_missing");
    ind.emplace_back(c.mask().begin(), c.mask().end());
  }
  m.names.push_back("privileged");
  ind.emplace_back(frame.privileged.begin(), frame.privileged.end());
  m.names.push_back("favourable");
  std::vector<double> fav(d.n_rows());
  for (std::size_t r = 0; r < d.n_rows(); ++r) fav[r] = d.label().code(r) == frame.favourable_code ? 1.0 : 0.0;
  ind.push_back(std::move(fav));

  const std::size_t k = ind.size();
  m.values.assign(k, std::vector<std::optional<double>>(k));
  for (std::size_t a = 0; a < k; ++a) {
    const bool defined = pearson(ind[a], ind[a]).has_value();
    m.values[a][a] = defined ? std::optional<double>(1.0) : std::nullopt;
    for (std::size_t b = a + 1; b < k; ++b) {
      m.values[a][b] = m.values[b][a] = pearson(ind[a], ind[b]);
    }
  }
  return m;
}

inline void to_json(nlohmann::json& j, const CorrelationMatrix& m) {
  j = nlohmann::json{{"names", m.names}, {"values", nlohmann::json::array()}};
  for (const auto& row : m.values) {
    auto jr = nlohmann::json::array();
    for (const auto& v : row) jr.push_back(v ? nlohmann::json(*v) : nlohmann::json(nullptr));
    j["values"].push_back(std::move(jr));
  }
}

// ---------------------------------------------------------------------------
// Multivariate normal EM and Little's test.

enum class CategoricalEncoding { kOrdinal, kOneHot };

inline CategoricalEncoding parse_encoding(std::string_view s) {
  if (s == "ordinal") return CategoricalEncoding::kOrdinal;
  if (s == "onehot" || s == "one_hot") return CategoricalEncoding::kOneHot;
  throw Error(ErrorCode::kInvalidArgument, "unknown categorical encoding '" + std::string(s) + "'");
}

/// Numeric view of a dataset; NaN marks a missing cell.
struct EncodedMatrix {
  std::vector<std::string> names;
  Eigen::MatrixXd values;
};

/// Every column (label included). Ordinal: the rank of the category in
/// lexicographic order. One-hot: one indicator per level except the first.
inline EncodedMatrix encode_for_mvn(const Dataset& d, CategoricalEncoding enc) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::vector<double>> cols;
  EncodedMatrix out;
  for (const auto& c : d.columns()) {
    if (c.is_numeric()) {
      std::vector<double> v(d.n_rows());
      for (std::size_t r = 0; r < d.n_rows(); ++r) v[r] = c.is_missing(r) ? nan : c.number(r);
      cols.push_back(std::move(v));
      out.names.push_back(c.name());
      continue;
    }
    const Levels& levels = c.levels();
    std::vector<std::size_t> order(levels.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return levels[a] < levels[b]; });
    std::vector<double> rank(levels.size());
    for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = static_cast<double>(i);
    if (enc == CategoricalEncoding::kOrdinal) {
      std::vector<double> v(d.n_rows());
      for (std::size_t r = 0; r < d.n_rows(); ++r) v[r] = c.is_missing(r) ? nan : rank[c.code(r)];
      cols.push_back(std::move(v));
      out.names.push_back(c.name());
    } else {
      for (std::size_t k = 1; k < order.size(); ++k) {
        const auto level = static_cast<std::int32_t>(order[k]);
        std::vector<double> v(d.n_rows());
        for (std::size_t r = 0; r < d.n_rows(); ++r) v[r] = c.is_missing(r) ? nan : (c.code(r) == level ? 1.0 : 0.0);
        cols.push_back(std::move(v));
        out.names.push_back(c.name() + "=" + levels[order[k]]);
      }
    }
  }
  out.values.resize(static_cast<Eigen::Index>(d.n_rows()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    for (std::size_t r = 0; r < d.n_rows(); ++r) {
      out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = cols[j][r];
    }
  }
  return out;
}

struct EmResult {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;  // maximum-likelihood (divisor n)
  double loglik = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  bool ridged = false;
  std::vector<double> loglik_trace;  // observed-data log-likelihood after each update
};

struct EmOptions {
  double tol = 1e-6;
  std::size_t max_iter = 500;
};

namespace detail {

// Rows sharing one missingness pattern, summarised by sufficient statistics
// over the observed coordinates.
struct PatternBlock {
  std::vector<Eigen::Index> obs;
  std::vector<Eigen::Index> mis;
  std::size_t n = 0;
  Eigen::VectorXd sum;    // over observed coordinates
  Eigen::MatrixXd cross;  // sum of outer products, observed coordinates
};

inline std::vector<PatternBlock> pattern_blocks(const Eigen::MatrixXd& x) {
  const Eigen::Index p = x.cols();
  std::map<std::vector<std::uint8_t>, std::vector<Eigen::Index>> groups;
  std::vector<std::uint8_t> key(static_cast<std::size_t>(p));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index j = 0; j < p; ++j) key[static_cast<std::size_t>(j)] = std::isnan(x(r, j)) ? 1 : 0;
    groups[key].push_back(r);
  }
  std::vector<PatternBlock> blocks;
  for (const auto& [pattern, rows] : groups) {
    PatternBlock b;
    for (Eigen::Index j = 0; j < p; ++j) (pattern[static_cast<std::size_t>(j)] ? b.mis : b.obs).push_back(j);
    b.n = rows.size();
    const auto q = static_cast<Eigen::Index>(b.obs.size());
    b.sum = Eigen::VectorXd::Zero(q);
    b.cross = Eigen::MatrixXd::Zero(q, q);
    Eigen::VectorXd xo(q);
    for (auto r : rows) {
      for (Eigen::Index k = 0; k < q; ++k) xo(k) = x(r, b.obs[static_cast<std::size_t>(k)]);
      b.sum += xo;
      b.cross.selfadjointView<Eigen::Lower>().rankUpdate(xo);
    }
    b.cross = b.cross.selfadjointView<Eigen::Lower>();
    blocks.push_back(std::move(b));
  }
  return blocks;
}

inline Eigen::VectorXd take(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(idx[i]);
  return out;
}

inline Eigen::MatrixXd take(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows,
                            const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(rows[i], cols[j]);
    }
  }
  return out;
}

// Centered second moment of the block around `mu_o`.
inline Eigen::MatrixXd centered_cross(const PatternBlock& b, const Eigen::VectorXd& mu_o) {
  const double n = static_cast<double>(b.n);
  return b.cross - b.sum * mu_o.transpose() - mu_o * b.sum.transpose() + n * mu_o * mu_o.transpose();
}

// Observed-data log-likelihood; nullopt when some restricted covariance is
// not positive definite.
inline std::optional<double> observed_loglik(const std::vector<PatternBlock>& blocks, const Eigen::VectorXd& mu,
                                             const Eigen::MatrixXd& sigma) {
  double ll = 0.0;
  for (const auto& b : blocks) {
    if (b.obs.empty()) continue;
    const Eigen::MatrixXd s = take(sigma, b.obs, b.obs);
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) return std::nullopt;
    const Eigen::VectorXd mu_o = take(mu, b.obs);
    const Eigen::MatrixXd qc = centered_cross(b, mu_o);
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const double quad = llt.solve(qc).trace();
    const double n = static_cast<double>(b.n);
    const double q = static_cast<double>(b.obs.size());
    ll += -0.5 * (n * q * std::log(2.0 * std::numbers::pi) + n * logdet + quad);
  }
  return ll;
}

inline bool all_restricted_pd(const std::vector<PatternBlock>& blocks, const Eigen::MatrixXd& sigma) {
  for (const auto& b : blocks) {
    if (b.obs.empty()) continue;
    Eigen::LLT<Eigen::MatrixXd> llt(take(sigma, b.obs, b.obs));
    if (llt.info() != Eigen::Success) return false;
  }
  return true;
}

// One EM update.
inline void em_step(const std::vector<PatternBlock>& blocks, std::size_t n_total, Eigen::VectorXd& mu,
                    Eigen::MatrixXd& sigma) {
  const Eigen::Index p = mu.size();
  Eigen::VectorXd t1 = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd t2 = Eigen::MatrixXd::Zero(p, p);
  for (const auto& b : blocks) {
    const double n = static_cast<double>(b.n);
    const auto& o = b.obs;
    const auto& m = b.mis;
    const Eigen::VectorXd mu_o = take(mu, o);
    const Eigen::VectorXd mu_m = take(mu, m);
    const auto qo = static_cast<Eigen::Index>(o.size());
    const auto qm = static_cast<Eigen::Index>(m.size());
    // Regression of missing on observed coordinates.
    Eigen::MatrixXd coef(qm, qo);
    Eigen::MatrixXd cond = take(sigma, m, m);
    if (qo > 0 && qm > 0) {
      Eigen::LLT<Eigen::MatrixXd> llt(take(sigma, o, o));
      const Eigen::MatrixXd s_om = take(sigma, o, m);
      coef = llt.solve(s_om).transpose();
      cond -= coef * s_om;
    }
    const Eigen::VectorXd s = qo > 0 ? Eigen::VectorXd(b.sum - n * mu_o) : Eigen::VectorXd::Zero(0);
    const Eigen::MatrixXd qc = qo > 0 ? centered_cross(b, mu_o) : Eigen::MatrixXd::Zero(0, 0);

    Eigen::VectorXd sum_m = n * mu_m;
    Eigen::MatrixXd mm = n * mu_m * mu_m.transpose() + n * cond;
    Eigen::MatrixXd om = Eigen::MatrixXd::Zero(qo, qm);
    if (qo > 0 && qm > 0) {
      const Eigen::VectorXd bs = coef * s;
      sum_m += bs;
      mm += mu_m * bs.transpose() + bs * mu_m.transpose() + coef * qc * coef.transpose();
      om = n * mu_o * mu_m.transpose() + mu_o * bs.transpose() + s * mu_m.transpose() + qc * coef.transpose();
    }
    for (Eigen::Index i = 0; i < qo; ++i) {
      t1(o[static_cast<std::size_t>(i)]) += b.sum(i);
      for (Eigen::Index j = 0; j < qo; ++j) t2(o[static_cast<std::size_t>(i)], o[static_cast<std::size_t>(j)]) += b.cross(i, j);
      for (Eigen::Index j = 0; j < qm; ++j) {
        t2(o[static_cast<std::size_t>(i)], m[static_cast<std::size_t>(j)]) += om(i, j);
        t2(m[static_cast<std::size_t>(j)], o[static_cast<std::size_t>(i)]) += om(i, j);
      }
    }
    for (Eigen::Index i = 0; i < qm; ++i) {
      t1(m[static_cast<std::size_t>(i)]) += sum_m(i);
      for (Eigen::Index j = 0; j < qm; ++j) t2(m[static_cast<std::size_t>(i)], m[static_cast<std::size_t>(j)]) += mm(i, j);
    }
  }
  const double n = static_cast<double>(n_total);
  mu = t1 / n;
  sigma = t2 / n - mu * mu.transpose();
  sigma = 0.5 * (sigma + sigma.transpose());
}

struct Standardizer {
  Eigen::VectorXd center;
  Eigen::VectorXd scale;
};

inline Standardizer standardize(Eigen::MatrixXd& x, const std::vector<std::string>& names) {
  const Eigen::Index p = x.cols();
  Standardizer st{Eigen::VectorXd::Zero(p), Eigen::VectorXd::Ones(p)};
  for (Eigen::Index j = 0; j < p; ++j) {
    std::vector<double> obs;
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      if (!std::isnan(x(r, j))) obs.push_back(x(r, j));
    }
    if (obs.empty()) {
      const std::string name = static_cast<std::size_t>(j) < names.size() ? names[static_cast<std::size_t>(j)]
                                                                          : std::to_string(j);
      throw Error(ErrorCode::kAllMissingColumn, "column '" + name + "' has no observed values");
    }
    st.center(j) = stats::mean(obs);
    const double sd = obs.size() > 1 ? stats::stddev(obs) : 0.0;
    st.scale(j) = sd > 0 ? sd : 1.0;
    for (Eigen::Index r = 0; r < x.rows(); ++r) x(r, j) = (x(r, j) - st.center(j)) / st.scale(j);
  }
  return st;
}

inline EmResult em_standardized(const std::vector<PatternBlock>& blocks, std::size_t n_rows, Eigen::Index p,
                                const EmOptions& opt) {
  // Start from observed means and variances.
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd count = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(p);
  for (const auto& b : blocks) {
    for (std::size_t k = 0; k < b.obs.size(); ++k) {
      const auto j = b.obs[k];
      mu(j) += b.sum(static_cast<Eigen::Index>(k));
      sq(j) += b.cross(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
      count(j) += static_cast<double>(b.n);
    }
  }
  mu = mu.cwiseQuotient(count);
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) sigma(j, j) = std::max(sq(j) / count(j) - mu(j) * mu(j), 1e-12);

  EmResult res;
  auto regularize = [&]() {
    if (all_restricted_pd(blocks, sigma)) return;
    const double ridge = 1e-8 * std::max(sigma.trace(), 1e-300) / static_cast<double>(p);
    sigma.diagonal().array() += ridge;
    res.ridged = true;
    if (!all_restricted_pd(blocks, sigma)) {
      throw Error(ErrorCode::kSingularCovariance, "covariance is singular after ridge regularisation");
    }
  };

  const bool complete = blocks.size() == 1 && blocks.front().mis.empty();
  std::optional<double> prev = observed_loglik(blocks, mu, sigma);
  for (std::size_t it = 1; it <= opt.max_iter; ++it) {
    em_step(blocks, n_rows, mu, sigma);
    regularize();
    const double ll = *observed_loglik(blocks, mu, sigma);
    res.loglik_trace.push_back(ll);
    res.iterations = it;
    if (complete || (prev && std::fabs(ll - *prev) <= opt.tol * std::max(std::fabs(*prev), 1e-300))) {
      res.converged = true;
      break;
    }
    prev = ll;
  }
  res.mean = mu;
  res.covariance = sigma;
  res.loglik = res.loglik_trace.empty() ? 0.0 : res.loglik_trace.back();
  return res;
}

}  // namespace detail

/// EM estimates of the mean and covariance of a multivariate normal from a
/// matrix with NaN for missing entries.
inline EmResult em_mvn(Eigen::MatrixXd x, const EmOptions& opt = {}, const std::vector<std::string>& names = {}) {
  if (x.cols() < 2) throw Error(ErrorCode::kInvalidArgument, "EM needs at least two columns");
  if (x.rows() == 0) throw Error(ErrorCode::kInvalidArgument, "EM needs at least one row");
  const detail::Standardizer st = detail::standardize(x, names);
  const auto blocks = detail::pattern_blocks(x);
  EmResult res = detail::em_standardized(blocks, static_cast<std::size_t>(x.rows()), x.cols(), opt);
  // Back to the original scale. The log-likelihood shifts by the Jacobian.
  const Eigen::VectorXd& s = st.scale;
  res.mean = st.center + s.cwiseProduct(res.mean);
  res.covariance = s.asDiagonal() * res.covariance * s.asDiagonal();
  double jac = 0.0;
  for (const auto& b : blocks) {
    for (auto j : b.obs) jac += static_cast<double>(b.n) * std::log(s(j));
  }
  for (auto& ll : res.loglik_trace) ll -= jac;
  res.loglik -= jac;
  return res;
}

inline EmResult em_mvn(const Dataset& d, CategoricalEncoding enc, const EmOptions& opt = {}) {
  EncodedMatrix m = encode_for_mvn(d, enc);
  return em_mvn(std::move(m.values), opt, m.names);
}

struct McarTestResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
  std::size_t n_patterns = 0;  // patterns contributing to the statistic
  std::size_t dropped_patterns = 0;
  std::size_t em_iterations = 0;
  bool em_converged = false;
  std::vector<std::string> variables;
  std::vector<std::string> warnings;
};

/// Little's chi-square test of MCAR on a NaN-coded matrix. Columns without
/// observed variation are excluded first.
inline McarTestResult little_mcar_test(Eigen::MatrixXd x, std::vector<std::string> names = {},
                                       const EmOptions& opt = {}) {
  if (names.empty()) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) names.push_back("x" + std::to_string(j));
  }
  if (!x.array().isNaN().any()) throw Error(ErrorCode::kNoMissingValues, "MCAR test is undefined on complete data");
  McarTestResult res;
  // Drop constant columns.
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    double first = std::numeric_limits<double>::quiet_NaN();
    bool varies = false, any = false;
    for (Eigen::Index r = 0; r < x.rows() && !varies; ++r) {
      const double v = x(r, j);
      if (std::isnan(v)) continue;
      if (!any) {
        first = v;
        any = true;
      } else if (v != first) {
        varies = true;
      }
    }
    if (!any) {
      throw Error(ErrorCode::kAllMissingColumn, "column '" + names[static_cast<std::size_t>(j)] + "' has no observed values");
    }
    if (varies) {
      keep.push_back(j);
    } else {
      res.warnings.push_back("column '" + names[static_cast<std::size_t>(j)] + "' is constant; excluded");
    }
  }
  Eigen::MatrixXd y(x.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    y.col(static_cast<Eigen::Index>(k)) = x.col(keep[k]);
    res.variables.push_back(names[static_cast<std::size_t>(keep[k])]);
  }
  if (!y.array().isNaN().any()) {
    throw Error(ErrorCode::kNoMissingValues, "missing values occur only in constant columns");
  }
  if (y.cols() < 2) throw Error(ErrorCode::kInvalidArgument, "MCAR test needs at least two varying columns");

  detail::standardize(y, res.variables);
  const auto blocks = detail::pattern_blocks(y);
  const EmResult em = detail::em_standardized(blocks, static_cast<std::size_t>(y.rows()), y.cols(), opt);
  res.em_iterations = em.iterations;
  res.em_converged = em.converged;

  std::size_t sum_pj = 0;
  for (const auto& b : blocks) {
    if (b.obs.empty()) continue;
    if (b.n < 2) {
      ++res.dropped_patterns;
      continue;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(detail::take(em.covariance, b.obs, b.obs));
    if (llt.info() != Eigen::Success) {
      ++res.dropped_patterns;
      continue;
    }
    const Eigen::VectorXd diff = b.sum / static_cast<double>(b.n) - detail::take(em.mean, b.obs);
    res.statistic += static_cast<double>(b.n) * diff.dot(llt.solve(diff));
    sum_pj += b.obs.size();
    ++res.n_patterns;
  }
  if (res.dropped_patterns > 0) {
    res.warnings.push_back(std::to_string(res.dropped_patterns) +
                           " pattern(s) with fewer than two rows or a singular covariance were dropped");
  }
  const auto p = static_cast<std::size_t>(y.cols());
  if (sum_pj <= p) {
    throw Error(ErrorCode::kInsufficientPatternSize, "too few usable missingness patterns for the test");
  }
  res.dof = sum_pj - p;
  res.p_value = stats::chi_square_upper_tail(res.statistic, static_cast<double>(res.dof));
  return res;
}

inline McarTestResult little_mcar_test(const Dataset& d, CategoricalEncoding enc, const EmOptions& opt = {}) {
  if (d.missing_cell_count() == 0) throw Error(ErrorCode::kNoMissingValues, "MCAR test is undefined on complete data");
  EncodedMatrix m = encode_for_mvn(d, enc);
  return little_mcar_test(std::move(m.values), std::move(m.names), opt);
}

inline void to_json(nlohmann::json& j, const McarTestResult& r) {
  j = nlohmann::json{{"statistic", r.statistic},
                     {"dof", r.dof},
                     {"p_value", r.p_value},
                     {"n_patterns", r.n_patterns},
                     {"dropped_patterns", r.dropped_patterns},
                     {"em_iterations", r.em_iterations},
                     {"em_converged", r.em_converged},
                     {"variables", r.variables},
                     {"warnings", r.warnings}};
}

}  // namespace fairmiss

#endif  // FAIRMISS_MISSINGNESS_HPP
