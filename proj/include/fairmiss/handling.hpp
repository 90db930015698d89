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

#ifndef FAIRMISS_HANDLING_HPP
#define FAIRMISS_HANDLING_HPP

// Missing-data treatments: listwise deletion, column deletion, labelled
// category and mean/mode imputation.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairmiss/dataset.hpp"
#include "fairmiss/error.hpp"
#include "fairmiss/stats.hpp"

namespace fairmiss {

enum class Strategy { kListwiseDeletion, kColumnDeletion, kLabelledCategory, kImputation };

inline std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::kListwiseDeletion: return "LD";
    case Strategy::kColumnDeletion: return "CD";
    case Strategy::kLabelledCategory: return "LC";
    case Strategy::kImputation: return "IM";
  }
  return "?";
}

struct HandlingReport {
  Strategy strategy = Strategy::kListwiseDeletion;
  std::size_t rows_removed = 0;
  std::vector<std::string> columns_removed;
  std::size_t cells_filled = 0;
  std::vector<std::string> warnings;
};

inline void to_json(nlohmann::json& j, const HandlingReport& r) {
  j = nlohmann::json{{"strategy", to_string(r.strategy)},
                     {"rows_removed", r.rows_removed},
                     {"columns_removed", r.columns_removed},
                     {"cells_filled", r.cells_filled},
                     {"warnings", r.warnings}};
}

inline std::pair<Dataset, HandlingReport> listwise_delete(const Dataset& d) {
  MissingnessSplit parts = split_by_missingness(d);
  HandlingReport rep;
  rep.strategy = Strategy::kListwiseDeletion;
  rep.rows_removed = parts.with_missing.n_rows();
  if (d.n_rows() > 0 && parts.without_missing.n_rows() == 0) {
    rep.warnings.push_back("every row has a missing value; the result is empty");
  }
  return {std::move(parts.without_missing), std::move(rep)};
}

inline std::pair<Dataset, HandlingReport> column_delete(const Dataset& d) {
  const std::set<std::string> affected = columns_with_missing(d);
  HandlingReport rep;
  rep.strategy = Strategy::kColumnDeletion;
  for (const auto& c : d.columns()) {
    if (affected.count(c.name())) rep.columns_removed.push_back(c.name());
  }
  return {drop_columns(d, affected), std::move(rep)};
}

struct LabelledCategoryPolicy {
  enum class Kind { kFlag, kBin };
  Kind kind = Kind::kBin;
  std::size_t bins = 4;

  static LabelledCategoryPolicy flag() { return {Kind::kFlag, 0}; }
  static LabelledCategoryPolicy bin(std::size_t k) { return {Kind::kBin, k}; }
};

inline constexpr const char* kMissingCategory = "missing";

namespace detail {

inline std::string unused_level(const Levels& levels, std::string candidate) {
  while (std::find(levels.begin(), levels.end(), candidate) != levels.end()) candidate += "_";
  return candidate;
}

// Equal-frequency bins over the observed values: cut points at the sorted
// values with ranks floor(i * m / k), i = 1..k-1, deduplicated. Bin b holds
// values in [cut_{b-1}, cut_b).
inline Column bin_numeric(const Column& c, std::size_t k, std::vector<std::string>& warnings) {
  std::vector<double> obs;
  for (std::size_t r = 0; r < c.size(); ++r) {
    if (!c.is_missing(r)) obs.push_back(c.number(r));
  }
  std::sort(obs.begin(), obs.end());
  std::vector<double> cuts;
  for (std::size_t i = 1; i < k && !obs.empty(); ++i) {
    const double v = obs[i * obs.size() / k];
    if (v > obs.front() && (cuts.empty() || v > cuts.back())) cuts.push_back(v);
  }
  if (cuts.empty()) {
    warnings.push_back("column '" + c.name() + "' cannot be binned; using one bin");
  }
  Levels levels;
  for (std::size_t b = 0; b <= cuts.size(); ++b) levels.push_back("bin" + std::to_string(b + 1));
  levels.push_back(kMissingCategory);
  const auto missing_code = static_cast<std::int32_t>(levels.size() - 1);
  std::vector<std::int32_t> codes(c.size());
  for (std::size_t r = 0; r < c.size(); ++r) {
    if (c.is_missing(r)) {
      codes[r] = missing_code;
    } else {
      codes[r] = static_cast<std::int32_t>(std::upper_bound(cuts.begin(), cuts.end(), c.number(r)) - cuts.begin());
    }
  }
  return Column::categorical(c.name(), std::make_shared<const Levels>(std::move(levels)), std::move(codes));
}

inline Column add_missing_category(const Column& c) {
  Levels levels = c.levels();
  levels.push_back(unused_level(levels, kMissingCategory));
  const auto missing_code = static_cast<std::int32_t>(levels.size() - 1);
  std::vector<std::int32_t> codes(c.codes().begin(), c.codes().end());
  for (std::size_t r = 0; r < c.size(); ++r) {
    if (c.is_missing(r)) codes[r] = missing_code;
  }
  return Column::categorical(c.name(), std::make_shared<const Levels>(std::move(levels)), std::move(codes));
}

}  // namespace detail

/// Makes missingness explicit in every feature column that has masked
/// cells. Flag: the column is replaced by a `<name>_missing` indicator with
/// levels {"0", "1"}. Bin: numeric columns become equal-frequency bins plus
/// a "missing" level; categorical columns gain a "missing" level.
inline std::pair<Dataset, HandlingReport> labelled_category(const Dataset& d, const LabelledCategoryPolicy& policy) {
  if (policy.kind == LabelledCategoryPolicy::Kind::kBin && policy.bins < 2) {
    throw Error(ErrorCode::kInvalidArgument, "bin policy needs at least two bins");
  }
  HandlingReport rep;
  rep.strategy = Strategy::kLabelledCategory;
  std::vector<Column> cols;
  for (std::size_t i = 0; i < d.n_columns(); ++i) {
    const Column& c = d.column(i);
    if (!c.has_missing() || d.label_index() == i) {
      cols.push_back(c);
      continue;
    }
    if (policy.kind == LabelledCategoryPolicy::Kind::kFlag) {
      std::vector<std::int32_t> codes(c.size());
      for (std::size_t r = 0; r < c.size(); ++r) codes[r] = c.is_missing(r) ? 1 : 0;
      std::string name = c.name() + "_missing";
      while (d.index_of(name)) name += "_";
      cols.push_back(Column::categorical(std::move(name), std::make_shared<const Levels>(Levels{"0", "1"}),
                                         std::move(codes)));
      rep.columns_removed.push_back(c.name());
    } else if (c.is_numeric()) {
      cols.push_back(detail::bin_numeric(c, policy.bins, rep.warnings));
    } else {
      cols.push_back(detail::add_missing_category(c));
    }
    rep.cells_filled += c.missing_count();
  }
  std::vector<RowId> ids(d.row_ids().begin(), d.row_ids().end());
  return {Dataset(std::move(cols), d.label_name(), std::move(ids)), std::move(rep)};
}

enum class NumericFill { kMean, kMedian };

struct FillValue {
  ColumnKind kind = ColumnKind::kNumeric;
  double number = 0.0;
  std::string category;
  friend bool operator==(const FillValue&, const FillValue&) = default;
};

struct ImputationModel {
  NumericFill numeric_fill = NumericFill::kMean;
  std::size_t fitted_on = 0;
  std::map<std::string, FillValue> fills;  // every non-label column
  friend bool operator==(const ImputationModel&, const ImputationModel&) = default;
};

/// Means (or medians) of observed numeric cells and modes of observed
/// categorical cells; mode ties go to the lexicographically smallest level.
inline ImputationModel fit_imputer(const Dataset& train, NumericFill numeric_fill = NumericFill::kMean) {
  ImputationModel m;
  m.numeric_fill = numeric_fill;
  m.fitted_on = train.n_rows();
  for (auto i : train.feature_indices()) {
    const Column& c = train.column(i);
    if (c.missing_count() == c.size()) {
      throw Error(ErrorCode::kAllMissingColumn, "column '" + c.name() + "' has no observed values");
    }
    FillValue f;
    f.kind = c.kind();
    if (c.is_numeric()) {
      std::vector<double> obs;
      for (std::size_t r = 0; r < c.size(); ++r) {
        if (!c.is_missing(r)) obs.push_back(c.number(r));
      }
      if (numeric_fill == NumericFill::kMean) {
        f.number = stats::mean(obs);
      } else {
        std::sort(obs.begin(), obs.end());
        const std::size_t h = obs.size() / 2;
        f.number = obs.size() % 2 ? obs[h] : 0.5 * (obs[h - 1] + obs[h]);
      }
    } else {
      std::vector<std::size_t> counts(c.levels().size(), 0);
      for (std::size_t r = 0; r < c.size(); ++r) {
        if (!c.is_missing(r)) ++counts[static_cast<std::size_t>(c.code(r))];
      }
      std::size_t best = 0;
      for (std::size_t k = 1; k < counts.size(); ++k) {
        if (counts[k] > counts[best] || (counts[k] == counts[best] && c.levels()[k] < c.levels()[best])) best = k;
      }
      f.category = c.levels()[best];
    }
    m.fills.emplace(c.name(), std::move(f));
  }
  return m;
}

inline std::pair<Dataset, HandlingReport> apply_imputer(const ImputationModel& m, const Dataset& d) {
  HandlingReport rep;
  rep.strategy = Strategy::kImputation;
  std::vector<Column> cols;
  for (std::size_t i = 0; i < d.n_columns(); ++i) {
    const Column& c = d.column(i);
    if (!c.has_missing() || d.label_index() == i) {
      cols.push_back(c);
      continue;
    }
    const auto it = m.fills.find(c.name());
    if (it == m.fills.end()) {
      throw Error(ErrorCode::kSchemaMismatch, "imputation model has no fill value for '" + c.name() + "'");
    }
    const FillValue& f = it->second;
    if (f.kind != c.kind()) {
      throw Error(ErrorCode::kSchemaMismatch, "column '" + c.name() + "' changed kind since the imputer was fit");
    }
    rep.cells_filled += c.missing_count();
    if (c.is_numeric()) {
      std::vector<double> v(c.numbers().begin(), c.numbers().end());
      for (std::size_t r = 0; r < c.size(); ++r) {
        if (c.is_missing(r)) v[r] = f.number;
      }
      cols.push_back(Column::numeric(c.name(), std::move(v)));
      continue;
    }
    std::vector<std::int32_t> codes(c.codes().begin(), c.codes().end());
    std::shared_ptr<const Levels> levels = c.shared_levels();
    auto code = c.level_code(f.category);
    if (!code) {
      Levels extended = c.levels();
      extended.push_back(f.category);
      code = static_cast<std::int32_t>(extended.size() - 1);
      levels = std::make_shared<const Levels>(std::move(extended));
    }
    for (std::size_t r = 0; r < c.size(); ++r) {
      if (c.is_missing(r)) codes[r] = *code;
    }
    cols.push_back(Column::categorical(c.name(), std::move(levels), std::move(codes)));
  }
  std::vector<RowId> ids(d.row_ids().begin(), d.row_ids().end());
  return {Dataset(std::move(cols), d.label_name(), std::move(ids)), std::move(rep)};
}

inline void to_json(nlohmann::json& j, const ImputationModel& m) {
  j = nlohmann::json::object();
  j["numeric_fill"] = m.numeric_fill == NumericFill::kMean ? "mean" : "median";
  j["fitted_on"] = m.fitted_on;
  auto& fills = j["fills"] = nlohmann::json::object();
  for (const auto& [name, f] : m.fills) {
    if (f.kind == ColumnKind::kNumeric) {
      fills[name] = {{"kind", "numeric"}, {"value", f.number}};
    } else {
      fills[name] = {{"kind", "categorical"}, {"value", f.category}};
    }
  }
}

inline void from_json(const nlohmann::json& j, ImputationModel& m) {
  try {
    const std::string fill = j.at("numeric_fill").get<std::string>();
    if (fill != "mean" && fill != "median") throw Error(ErrorCode::kParseError, "unknown numeric_fill '" + fill + "'");
    m.numeric_fill = fill == "mean" ? NumericFill::kMean : NumericFill::kMedian;
    m.fitted_on = j.at("fitted_on").get<std::size_t>();
    m.fills.clear();
    for (const auto& [name, f] : j.at("fills").items()) {
      FillValue v;
      const std::string kind = f.at("kind").get<std::string>();
      if (kind == "numeric") {
        v.kind = ColumnKind::kNumeric;
        v.number = f.at("value").get<double>();
      } else if (kind == "categorical") {
        v.kind = ColumnKind::kCategorical;
        v.category = f.at("value").get<std::string>();
      } else {
        throw Error(ErrorCode::kParseError, "unknown fill kind '" + kind + "'");
      }
      m.fills.emplace(name, std::move(v));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("imputation model: ") + e.what());
  }
}

}  // namespace fairmiss

#endif  // FAIRMISS_HANDLING_HPP
