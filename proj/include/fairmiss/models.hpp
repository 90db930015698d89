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

#ifndef FAIRMISS_MODELS_HPP
#define FAIRMISS_MODELS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairmiss/models/cart.hpp"
#include "fairmiss/models/common.hpp"
#include "fairmiss/models/forest.hpp"
#include "fairmiss/models/logistic.hpp"
#include "fairmiss/models/naive_bayes.hpp"

namespace fairmiss {

namespace models {

struct MajorityModel {
  Levels classes;
  std::size_t cls = 0;
};

/// Evaluation-only: echoes the true labels of the rows it is given.
struct PerfectOracleModel {};

}  // namespace models

enum class ModelKind { kMajority, kPerfect, kCart, kLogistic, kNaiveBayes, kForest };

inline std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::kMajority: return "majority";
    case ModelKind::kPerfect: return "perfect";
    case ModelKind::kCart: return "cart";
    case ModelKind::kLogistic: return "logistic";
    case ModelKind::kNaiveBayes: return "naive_bayes";
    case ModelKind::kForest: return "forest";
  }
  return "cart";
}

inline ModelKind parse_model_kind(std::string_view s) {
  for (auto k : {ModelKind::kMajority, ModelKind::kPerfect, ModelKind::kCart, ModelKind::kLogistic,
                 ModelKind::kNaiveBayes, ModelKind::kForest}) {
    if (s == to_string(k)) return k;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown model '" + std::string(s) + "'");
}

struct ModelSpec {
  ModelKind kind = ModelKind::kCart;
  models::CartParams cart;
  models::LogisticParams logistic;
  models::NaiveBayesParams naive_bayes;
  models::ForestParams forest;
  models::PredictOptions predict;

  static ModelSpec of(ModelKind k) {
    ModelSpec s;
    s.kind = k;
    return s;
  }
};

struct Model {
  std::variant<models::MajorityModel, models::PerfectOracleModel, models::CartModel, models::LogisticModel,
               models::NaiveBayesModel, models::ForestModel>
      impl;
  models::PredictOptions predict_options;
  std::vector<std::string> warnings;

  ModelKind kind() const {
    return std::visit(
        [](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, models::MajorityModel>) return ModelKind::kMajority;
          if constexpr (std::is_same_v<T, models::PerfectOracleModel>) return ModelKind::kPerfect;
          if constexpr (std::is_same_v<T, models::CartModel>) return ModelKind::kCart;
          if constexpr (std::is_same_v<T, models::LogisticModel>) return ModelKind::kLogistic;
          if constexpr (std::is_same_v<T, models::NaiveBayesModel>) return ModelKind::kNaiveBayes;
          return ModelKind::kForest;
        },
        impl);
  }
};

namespace models {

inline MajorityModel fit_majority(const Dataset& train) {
  const auto schema = training_schema(train);
  return MajorityModel{schema.classes, argmax(class_counts(train))};
}

inline Predictions predict(const MajorityModel& m, const Dataset& rows) {
  std::vector<std::size_t> cls(rows.n_rows(), m.cls);
  std::vector<double> score(m.classes.size(), 0.0);
  score[m.cls] = 1.0;
  return to_predictions(m.classes, rows, cls, std::vector<std::vector<double>>(rows.n_rows(), score));
}

inline Predictions predict(const PerfectOracleModel&, const Dataset& rows) {
  if (!rows.has_label()) throw Error(ErrorCode::kMissingLabel, "the perfect oracle needs true labels");
  Predictions p;
  p.labels.assign(rows.label().codes().begin(), rows.label().codes().end());
  return p;
}

}  // namespace models

/// Fits the variant named by `spec`. Non-tree learners given one class fall
/// back to a constant model and record a warning.
inline Model fit(const Dataset& train, const ModelSpec& spec, std::uint64_t seed) {
  Model m;
  m.predict_options = spec.predict;
  const auto schema = models::training_schema(train);
  const auto counts = models::class_counts(train);
  const bool single = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }) < 2;
  switch (spec.kind) {
    case ModelKind::kMajority:
      m.impl = models::fit_majority(train);
      return m;
    case ModelKind::kPerfect:
      m.impl = models::PerfectOracleModel{};
      return m;
    case ModelKind::kCart:
      m.impl = models::fit_cart(train, spec.cart, seed, &m.warnings);
      return m;
    default:
      break;
  }
  models::require_complete_features(train, to_string(spec.kind));
  if (single) {
    m.warnings.push_back("training set has a single class; using a constant model");
    m.impl = models::fit_majority(train);
    return m;
  }
  if (spec.kind == ModelKind::kLogistic) {
    m.impl = models::fit_logistic(train, spec.logistic);
  } else if (spec.kind == ModelKind::kNaiveBayes) {
    m.impl = models::fit_naive_bayes(train, spec.naive_bayes);
  } else {
    m.impl = models::fit_forest(train, spec.forest, seed);
  }
  return m;
}

inline Predictions predict(const Model& m, const Dataset& rows) {
  return std::visit(
      [&](const auto& impl) {
        using T = std::decay_t<decltype(impl)>;
        if constexpr (std::is_same_v<T, models::CartModel>) {
          return models::predict(impl, rows, m.predict_options);
        } else {
          return models::predict(impl, rows);
        }
      },
      m.impl);
}

/// Impurity decrease per column, normalised to sum 1 (all zeros when the
/// tree has no split).
inline std::map<std::string, double> feature_importance(const Model& m) {
  std::vector<double> raw;
  const models::TrainingSchema* schema = nullptr;
  if (const auto* t = std::get_if<models::CartModel>(&m.impl)) {
    raw = models::raw_importance(*t);
    schema = &t->schema;
  } else if (const auto* f = std::get_if<models::ForestModel>(&m.impl)) {
    raw.assign(f->schema.features.size(), 0.0);
    for (const auto& tree : f->trees) {
      const auto r = models::raw_importance(tree);
      for (std::size_t i = 0; i < r.size(); ++i) raw[i] += r[i];
    }
    schema = &f->schema;
  } else {
    throw Error(ErrorCode::kNotATree, "feature importance needs a tree or forest");
  }
  double total = 0.0;
  for (auto v : raw) total += v;
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < raw.size(); ++i) out[schema->features[i].name] = total > 0 ? raw[i] / total : 0.0;
  return out;
}

inline void to_json(nlohmann::json& j, const Model& m) {
  std::visit(
      [&](const auto& impl) {
        using T = std::decay_t<decltype(impl)>;
        if constexpr (std::is_same_v<T, models::MajorityModel>) {
          j = nlohmann::json{{"type", "majority"}, {"class", impl.classes[impl.cls]}};
        } else if constexpr (std::is_same_v<T, models::PerfectOracleModel>) {
          j = nlohmann::json{{"type", "perfect"}};
        } else {
          j = impl;
        }
      },
      m.impl);
  if (m.kind() == ModelKind::kCart) j["missing_policy"] = to_string(m.predict_options.policy);
  j["warnings"] = m.warnings;
}

// Spec parsing: every field is optional and defaults as in the structs.
inline void from_json(const nlohmann::json& j, ModelSpec& s) {
  try {
    s = ModelSpec{};
    s.kind = parse_model_kind(j.at("kind").get<std::string>());
    const auto get = [&](const nlohmann::json& obj, const char* key, auto& field) {
      if (obj.contains(key)) field = obj.at(key).get<std::decay_t<decltype(field)>>();
    };
    const auto cart = [&](const nlohmann::json& c, models::CartParams& p) {
      get(c, "max_depth", p.max_depth);
      get(c, "min_split", p.min_split);
      get(c, "min_bucket", p.min_bucket);
      get(c, "complexity", p.complexity);
      get(c, "max_surrogates", p.max_surrogates);
      get(c, "use_surrogates", p.use_surrogates);
      get(c, "mtry", p.mtry);
    };
    cart(j, s.cart);
    if (j.contains("missing_policy")) s.predict.policy = models::parse_missing_policy(j.at("missing_policy").get<std::string>());
    get(j, "policy_seed", s.predict.seed);
    get(j, "l2", s.logistic.l2);
    get(j, "tolerance", s.logistic.tolerance);
    get(j, "max_iter", s.logistic.max_iter);
    get(j, "laplace", s.naive_bayes.laplace);
    get(j, "var_smoothing", s.naive_bayes.var_smoothing);
    get(j, "n_trees", s.forest.n_trees);
    get(j, "bootstrap", s.forest.bootstrap);
    if (s.kind == ModelKind::kForest) get(j, "mtry", s.forest.mtry);
    if (j.contains("tree")) cart(j.at("tree"), s.forest.tree);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("model spec: ") + e.what());
  }
}

inline void to_json(nlohmann::json& j, const ModelSpec& s) {
  j = nlohmann::json{{"kind", to_string(s.kind)}};
  switch (s.kind) {
    case ModelKind::kCart:
      j.update(nlohmann::json(s.cart));
      j["missing_policy"] = to_string(s.predict.policy);
      break;
    case ModelKind::kLogistic:
      j.update({{"l2", s.logistic.l2}, {"tolerance", s.logistic.tolerance}, {"max_iter", s.logistic.max_iter}});
      break;
    case ModelKind::kNaiveBayes:
      j.update({{"laplace", s.naive_bayes.laplace}, {"var_smoothing", s.naive_bayes.var_smoothing}});
      break;
    case ModelKind::kForest:
      j.update({{"n_trees", s.forest.n_trees}, {"mtry", s.forest.mtry}, {"bootstrap", s.forest.bootstrap},
                {"tree", nlohmann::json(s.forest.tree)}});
      break;
    default:
      break;
  }
}

}  // namespace fairmiss

#endif  // FAIRMISS_MODELS_HPP
