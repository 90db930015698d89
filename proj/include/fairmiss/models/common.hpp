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

#ifndef FAIRMISS_MODELS_COMMON_HPP
#define FAIRMISS_MODELS_COMMON_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairmiss/dataset.hpp"
#include "fairmiss/error.hpp"
#include "fairmiss/metrics.hpp"

namespace fairmiss::models {

struct FeatureInfo {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
  Levels levels;  // categorical only
};

/// Feature layout and class list captured at fit time.
struct TrainingSchema {
  std::vector<FeatureInfo> features;
  Levels classes;
  std::string label;
};

inline TrainingSchema training_schema(const Dataset& train) {
  if (!train.has_label()) throw Error(ErrorCode::kMissingLabel, "training data needs a label column");
  if (train.n_rows() == 0) throw Error(ErrorCode::kEmptyTrainingSet, "training set is empty");
  TrainingSchema s;
  s.label = *train.label_name();
  s.classes = train.label().levels();
  for (auto i : train.feature_indices()) {
    const Column& c = train.column(i);
    s.features.push_back({c.name(), c.kind(), c.is_categorical() ? c.levels() : Levels{}});
  }
  return s;
}

inline void require_complete_features(const Dataset& d, std::string_view model) {
  for (auto i : d.feature_indices()) {
    if (d.column(i).has_missing()) {
      throw Error(ErrorCode::kMissingValuesUnsupported,
                  std::string(model) + " cannot handle missing values (column '" + d.column(i).name() + "')");
    }
  }
}

inline std::vector<std::size_t> class_counts(const Dataset& d) {
  std::vector<std::size_t> counts(d.label().levels().size(), 0);
  for (auto c : d.label().codes()) ++counts[static_cast<std::size_t>(c)];
  return counts;
}

/// Index of the largest entry; ties go to the first.
template <typename T>
std::size_t argmax(const std::vector<T>& v) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k] > v[best]) best = k;
  }
  return best;
}

/// A dataset's columns aligned with a training schema. Categorical codes are
/// translated to training level indices; unseen levels read as -1.
class BoundRows {
 public:
  BoundRows(const TrainingSchema& schema, const Dataset& rows) : n_rows_(rows.n_rows()) {
    for (const auto& f : schema.features) {
      const auto idx = rows.index_of(f.name);
      if (!idx) throw Error(ErrorCode::kSchemaMismatch, "column '" + f.name + "' is missing");
      const Column& c = rows.column(*idx);
      if (c.kind() != f.kind) throw Error(ErrorCode::kSchemaMismatch, "column '" + f.name + "' changed kind");
      Bound b{&c, {}};
      if (c.is_categorical()) {
        std::unordered_map<std::string, std::int32_t> train_code;
        for (std::size_t k = 0; k < f.levels.size(); ++k) train_code.emplace(f.levels[k], static_cast<std::int32_t>(k));
        b.code_map.resize(c.levels().size(), -1);
        for (std::size_t k = 0; k < c.levels().size(); ++k) {
          const auto it = train_code.find(c.levels()[k]);
          if (it != train_code.end()) b.code_map[k] = it->second;
        }
      }
      features_.push_back(std::move(b));
    }
  }

  std::size_t n_rows() const noexcept { return n_rows_; }
  std::size_t n_features() const noexcept { return features_.size(); }
  bool missing(std::size_t j, std::size_t r) const noexcept { return features_[j].column->is_missing(r); }
  double number(std::size_t j, std::size_t r) const noexcept { return features_[j].column->number(r); }
  /// Training level index, or -1 when missing or unseen.
  std::int32_t code(std::size_t j, std::size_t r) const noexcept {
    const Column& c = *features_[j].column;
    if (c.is_missing(r)) return -1;
    return features_[j].code_map[static_cast<std::size_t>(c.code(r))];
  }

 private:
  struct Bound {
    const Column* column;
    std::vector<std::int32_t> code_map;
  };
  std::vector<Bound> features_;
  std::size_t n_rows_;
};

/// Converts model class indices into codes of `rows`' label column when it
/// has one; otherwise the model's own class indices are kept.
inline Predictions to_predictions(const Levels& classes, const Dataset& rows, const std::vector<std::size_t>& cls,
                                  std::vector<std::vector<double>> scores = {}) {
  Predictions p;
  p.labels.resize(cls.size());
  std::vector<std::int32_t> map(classes.size());
  for (std::size_t k = 0; k < classes.size(); ++k) {
    if (rows.has_label()) {
      const auto code = rows.label().level_code(classes[k]);
      map[k] = code ? *code : -1;
    } else {
      map[k] = static_cast<std::int32_t>(k);
    }
  }
  for (std::size_t r = 0; r < cls.size(); ++r) {
    const std::int32_t code = map[cls[r]];
    if (code < 0) {
      throw Error(ErrorCode::kSchemaMismatch, "predicted class '" + classes[cls[r]] + "' is not a label level");
    }
    p.labels[r] = code;
  }
  p.class_scores = std::move(scores);
  return p;
}

inline void to_json(nlohmann::json& j, const TrainingSchema& s) {
  j = nlohmann::json{{"label", s.label}, {"classes", s.classes}, {"features", nlohmann::json::array()}};
  for (const auto& f : s.features) {
    nlohmann::json jf{{"name", f.name}, {"kind", to_string(f.kind)}};
    if (f.kind == ColumnKind::kCategorical) jf["levels"] = f.levels;
    j["features"].push_back(std::move(jf));
  }
}

}  // namespace fairmiss::models

#endif  // FAIRMISS_MODELS_COMMON_HPP
