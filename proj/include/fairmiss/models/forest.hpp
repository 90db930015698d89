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

#ifndef FAIRMISS_MODELS_FOREST_HPP
#define FAIRMISS_MODELS_FOREST_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairmiss/models/cart.hpp"
#include "fairmiss/random.hpp"

namespace fairmiss::models {

struct ForestParams {
  std::size_t n_trees = 100;
  std::size_t mtry = 0;  // 0 means floor(sqrt(features))
  bool bootstrap = true;
  CartParams tree{30, 2, 1, 0.0, 0, false, 0};

  void validate() const {
    if (n_trees < 1) throw Error(ErrorCode::kInvalidArgument, "n_trees must be at least 1");
    tree.validate();
  }
};

struct ForestModel {
  TrainingSchema schema;
  ForestParams params;
  std::vector<CartModel> trees;
  std::vector<std::uint64_t> seeds;
};

/// Each tree draws its bootstrap sample and feature subsets from its own
/// stream derive_seed(seed, t), so trees can be fitted in any order.
inline ForestModel fit_forest(const Dataset& train, const ForestParams& params, std::uint64_t seed) {
  params.validate();
  require_complete_features(train, "random forest");
  ForestModel m;
  m.schema = training_schema(train);
  m.params = params;
  const std::size_t p = m.schema.features.size();
  CartParams tree = params.tree;
  tree.mtry = params.mtry > 0 ? params.mtry
                              : std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(p)))));
  const std::size_t n = train.n_rows();
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    const auto s = derive_seed(seed, t);
    m.seeds.push_back(s);
    if (params.bootstrap) {
      Rng rng(s);
      std::vector<std::size_t> rows(n);
      for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
      m.trees.push_back(fit_cart(train.select_rows(rows), tree, mix64(s)));
    } else {
      m.trees.push_back(fit_cart(train, tree, mix64(s)));
    }
  }
  return m;
}

/// Mean of the member trees' leaf distributions.
inline std::vector<std::vector<double>> predict_scores(const ForestModel& m, const Dataset& rows) {
  require_complete_features(rows, "random forest");
  std::vector<std::vector<double>> out(rows.n_rows(), std::vector<double>(m.schema.classes.size(), 0.0));
  for (const auto& t : m.trees) {
    const auto s = predict_scores(t, rows);
    for (std::size_t r = 0; r < s.size(); ++r) {
      for (std::size_t k = 0; k < s[r].size(); ++k) out[r][k] += s[r][k];
    }
  }
  for (auto& row : out) {
    for (auto& v : row) v /= static_cast<double>(m.trees.size());
  }
  return out;
}

inline Predictions predict(const ForestModel& m, const Dataset& rows) {
  auto scores = predict_scores(m, rows);
  std::vector<std::size_t> cls(scores.size());
  for (std::size_t r = 0; r < scores.size(); ++r) cls[r] = argmax(scores[r]);
  return to_predictions(m.schema.classes, rows, cls, std::move(scores));
}

inline void to_json(nlohmann::json& j, const ForestModel& m) {
  j = nlohmann::json{{"type", "forest"},
                     {"schema", m.schema},
                     {"n_trees", m.params.n_trees},
                     {"bootstrap", m.params.bootstrap},
                     {"seeds", m.seeds},
                     {"trees", nlohmann::json::array()}};
  for (const auto& t : m.trees) j["trees"].push_back(node_json(t, 0));
}

}  // namespace fairmiss::models

#endif  // FAIRMISS_MODELS_FOREST_HPP
