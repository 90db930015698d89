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

#ifndef FAIRMISS_MODELS_NAIVE_BAYES_HPP
#define FAIRMISS_MODELS_NAIVE_BAYES_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairmiss/models/common.hpp"

namespace fairmiss::models {

struct NaiveBayesParams {
  double laplace = 1.0;
  double var_smoothing = 1e-9;  // fraction of the largest feature variance added to every variance

  void validate() const {
    if (!(laplace > 0.0)) throw Error(ErrorCode::kInvalidArgument, "laplace must be positive");
    if (!(var_smoothing >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "var_smoothing must be non-negative");
  }
};

struct NaiveBayesModel {
  TrainingSchema schema;
  NaiveBayesParams params;
  std::vector<double> log_prior;                       // per class
  std::vector<std::vector<double>> mean, variance;     // [feature][class], numeric only
  std::vector<std::vector<std::vector<double>>> log_p;  // [feature][class][level], categorical only
};

inline NaiveBayesModel fit_naive_bayes(const Dataset& train, const NaiveBayesParams& params) {
  params.validate();
  require_complete_features(train, "naive Bayes");
  NaiveBayesModel m;
  m.schema = training_schema(train);
  m.params = params;
  const std::size_t k = m.schema.classes.size();
  const auto counts = class_counts(train);
  const auto n = static_cast<double>(train.n_rows());
  for (auto c : counts) {
    m.log_prior.push_back(c > 0 ? std::log(static_cast<double>(c) / n) : -std::numeric_limits<double>::infinity());
  }
  const auto y = train.label().codes();
  const BoundRows b(m.schema, train);
  const std::size_t p = m.schema.features.size();
  m.mean.resize(p);
  m.variance.resize(p);
  m.log_p.resize(p);

  double max_var = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    if (m.schema.features[j].kind == ColumnKind::kNumeric) {
      std::vector<double> s(k, 0.0), ss(k, 0.0);
      double all = 0, all2 = 0;
      for (std::size_t r = 0; r < b.n_rows(); ++r) {
        const auto c = static_cast<std::size_t>(y[r]);
        s[c] += b.number(j, r);
        all += b.number(j, r);
      }
      m.mean[j].resize(k);
      for (std::size_t c = 0; c < k; ++c) m.mean[j][c] = counts[c] > 0 ? s[c] / static_cast<double>(counts[c]) : 0.0;
      const double mu = all / n;
      for (std::size_t r = 0; r < b.n_rows(); ++r) {
        const auto c = static_cast<std::size_t>(y[r]);
        const double dv = b.number(j, r) - m.mean[j][c];
        ss[c] += dv * dv;
        all2 += (b.number(j, r) - mu) * (b.number(j, r) - mu);
      }
      max_var = std::max(max_var, all2 / n);
      m.variance[j].resize(k);
      for (std::size_t c = 0; c < k; ++c) m.variance[j][c] = counts[c] > 0 ? ss[c] / static_cast<double>(counts[c]) : 0.0;
    } else {
      const std::size_t levels = m.schema.features[j].levels.size();
      std::vector<std::vector<double>> tally(k, std::vector<double>(levels, 0.0));
      for (std::size_t r = 0; r < b.n_rows(); ++r) {
        tally[static_cast<std::size_t>(y[r])][static_cast<std::size_t>(b.code(j, r))] += 1.0;
      }
      m.log_p[j].assign(k, std::vector<double>(levels, 0.0));
      for (std::size_t c = 0; c < k; ++c) {
        const double denom = static_cast<double>(counts[c]) + params.laplace * static_cast<double>(levels);
        for (std::size_t l = 0; l < levels; ++l) m.log_p[j][c][l] = std::log((tally[c][l] + params.laplace) / denom);
      }
    }
  }
  // A floor keeps constant features from producing zero variances.
  const double eps = std::max(params.var_smoothing * max_var, 1e-12);
  for (auto& per_class : m.variance) {
    for (auto& v : per_class) v += eps;
  }
  return m;
}

inline std::vector<std::vector<double>> predict_scores(const NaiveBayesModel& m, const Dataset& rows) {
  require_complete_features(rows, "naive Bayes");
  const BoundRows b(m.schema, rows);
  const std::size_t k = m.log_prior.size();
  std::vector<std::vector<double>> out(rows.n_rows(), std::vector<double>(k));
  for (std::size_t r = 0; r < b.n_rows(); ++r) {
    auto& lp = out[r];
    for (std::size_t c = 0; c < k; ++c) {
      double s = m.log_prior[c];
      for (std::size_t j = 0; j < m.schema.features.size(); ++j) {
        if (m.schema.features[j].kind == ColumnKind::kNumeric) {
          const double v = m.variance[j][c];
          const double d = b.number(j, r) - m.mean[j][c];
          s += -0.5 * std::log(2.0 * std::numbers::pi * v) - d * d / (2.0 * v);
        } else if (const auto code = b.code(j, r); code >= 0) {
          s += m.log_p[j][c][static_cast<std::size_t>(code)];
        }
      }
      lp[c] = s;
    }
    const double mx = *std::max_element(lp.begin(), lp.end());
    double total = 0.0;
    for (auto& v : lp) total += (v = std::isinf(mx) ? 1.0 : std::exp(v - mx));
    for (auto& v : lp) v /= total;
  }
  return out;
}

inline Predictions predict(const NaiveBayesModel& m, const Dataset& rows) {
  auto scores = predict_scores(m, rows);
  std::vector<std::size_t> cls(scores.size());
  for (std::size_t r = 0; r < scores.size(); ++r) cls[r] = argmax(scores[r]);
  return to_predictions(m.schema.classes, rows, cls, std::move(scores));
}

inline void to_json(nlohmann::json& j, const NaiveBayesModel& m) {
  j = nlohmann::json{{"type", "naive_bayes"}, {"schema", m.schema}, {"laplace", m.params.laplace}};
  std::vector<double> prior;
  for (auto lp : m.log_prior) prior.push_back(std::exp(lp));
  j["priors"] = prior;
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t f = 0; f < m.schema.features.size(); ++f) {
    nlohmann::json jf{{"column", m.schema.features[f].name}};
    if (m.schema.features[f].kind == ColumnKind::kNumeric) {
      jf["mean"] = m.mean[f];
      jf["variance"] = m.variance[f];
    } else {
      nlohmann::json probs = nlohmann::json::array();
      for (const auto& per_level : m.log_p[f]) {
        std::vector<double> p;
        for (auto v : per_level) p.push_back(std::exp(v));
        probs.push_back(p);
      }
      jf["probabilities"] = probs;
    }
    features.push_back(jf);
  }
  j["features"] = features;
}

}  // namespace fairmiss::models

#endif  // FAIRMISS_MODELS_NAIVE_BAYES_HPP
