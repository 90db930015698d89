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

#ifndef FAIRMISS_DATASET_HPP
#define FAIRMISS_DATASET_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fairmiss/error.hpp"
#include "fairmiss/random.hpp"

namespace fairmiss {

enum class ColumnKind { kNumeric, kCategorical };

inline std::string_view to_string(ColumnKind kind) {
  return kind == ColumnKind::kNumeric ? "numeric" : "categorical";
}

using Levels = std::vector<std::string>;

/// A typed column with an explicit missing mask. Masked cells hold NaN
/// (numeric) or -1 (categorical) as payload; accessors never expose them as
/// data. Categorical levels are shared between a column and every row subset
/// taken from it, so codes stay comparable across train/test splits.
class Column {
 public:
  static Column numeric(std::string name, std::vector<double> values,
                        std::vector<std::uint8_t> missing = {}) {
    if (missing.empty()) missing.assign(values.size(), 0);
    if (missing.size() != values.size()) {
      throw Error(ErrorCode::kInvalidArgument, "column '" + name + "': mask length differs");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (missing[i]) values[i] = std::numeric_limits<double>::quiet_NaN();
    }
    Column c;
    c.name_ = std::move(name);
    c.kind_ = ColumnKind::kNumeric;
    c.values_ = std::move(values);
    c.missing_ = std::move(missing);
    return c;
  }

  static Column categorical(std::string name, std::shared_ptr<const Levels> levels,
                            std::vector<std::int32_t> codes,
                            std::vector<std::uint8_t> missing = {}) {
    if (!levels) levels = std::make_shared<const Levels>();
    if (missing.empty()) missing.assign(codes.size(), 0);
    if (missing.size() != codes.size()) {
      throw Error(ErrorCode::kInvalidArgument, "column '" + name + "': mask length differs");
    }
    const auto n_levels = static_cast<std::int32_t>(levels->size());
    for (std::size_t i = 0; i < codes.size(); ++i) {
      if (missing[i]) {
        codes[i] = -1;
      } else if (codes[i] < 0 || codes[i] >= n_levels) {
        throw Error(ErrorCode::kInvalidArgument, "column '" + name + "': code out of range");
      }
    }
    Column c;
    c.name_ = std::move(name);
    c.kind_ = ColumnKind::kCategorical;
    c.levels_ = std::move(levels);
    c.codes_ = std::move(codes);
    c.missing_ = std::move(missing);
    return c;
  }

  /// Builds a categorical column from raw strings; levels are the sorted
  /// distinct observed values unless `levels` is given.
  static Column categorical_from_strings(std::string name, const std::vector<std::string>& cells,
                                         std::vector<std::uint8_t> missing = {},
                                         std::optional<Levels> levels = std::nullopt) {
    if (missing.empty()) missing.assign(cells.size(), 0);
    Levels lv;
    if (levels) {
      lv = std::move(*levels);
    } else {
      std::set<std::string> seen;
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!missing[i]) seen.insert(cells[i]);
      }
      lv.assign(seen.begin(), seen.end());
    }
    std::vector<std::int32_t> codes(cells.size(), -1);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (missing[i]) continue;
      auto it = std::lower_bound(lv.begin(), lv.end(), cells[i]);
      if (it == lv.end() || *it != cells[i]) {
        // Caller-supplied levels need not be sorted.
        it = std::find(lv.begin(), lv.end(), cells[i]);
        if (it == lv.end()) {
          throw Error(ErrorCode::kInvalidArgument,
                      "column '" + name + "': value '" + cells[i] + "' not among levels");
        }
      }
      codes[i] = static_cast<std::int32_t>(it - lv.begin());
    }
    return categorical(std::move(name), std::make_shared<const Levels>(std::move(lv)),
                       std::move(codes), std::move(missing));
  }

  const std::string& name() const noexcept { return name_; }
  ColumnKind kind() const noexcept { return kind_; }
  bool is_numeric() const noexcept { return kind_ == ColumnKind::kNumeric; }
  bool is_categorical() const noexcept { return kind_ == ColumnKind::kCategorical; }
  std::size_t size() const noexcept { return missing_.size(); }

  bool is_missing(std::size_t row) const noexcept { return missing_[row] != 0; }
  double number(std::size_t row) const noexcept { return values_[row]; }
  std::int32_t code(std::size_t row) const noexcept { return codes_[row]; }
  const std::string& category(std::size_t row) const { return (*levels_)[codes_[row]]; }

  std::span<const double> numbers() const noexcept { return values_; }
  std::span<const std::int32_t> codes() const noexcept { return codes_; }
  std::span<const std::uint8_t> mask() const noexcept { return missing_; }
  const Levels& levels() const noexcept {
    static const Levels kEmpty;
    return levels_ ? *levels_ : kEmpty;
  }
  const std::shared_ptr<const Levels>& shared_levels() const noexcept { return levels_; }

  std::optional<std::int32_t> level_code(std::string_view value) const {
    const auto& lv = levels();
    for (std::size_t i = 0; i < lv.size(); ++i) {
      if (lv[i] == value) return static_cast<std::int32_t>(i);
    }
    return std::nullopt;
  }

  std::size_t missing_count() const noexcept {
    return static_cast<std::size_t>(std::count(missing_.begin(), missing_.end(), 1));
  }
  bool has_missing() const noexcept {
    return std::find(missing_.begin(), missing_.end(), 1) != missing_.end();
  }

  Column select(std::span<const std::size_t> rows) const {
    Column c;
    c.name_ = name_;
    c.kind_ = kind_;
    c.levels_ = levels_;
    c.missing_.reserve(rows.size());
    for (auto r : rows) c.missing_.push_back(missing_[r]);
    if (is_numeric()) {
      c.values_.reserve(rows.size());
      for (auto r : rows) c.values_.push_back(values_[r]);
    } else {
      c.codes_.reserve(rows.size());
      for (auto r : rows) c.codes_.push_back(codes_[r]);
    }
    return c;
  }

  Column renamed(std::string name) const {
    Column c = *this;
    c.name_ = std::move(name);
    return c;
  }

  friend bool operator==(const Column& a, const Column& b) {
    if (a.name_ != b.name_ || a.kind_ != b.kind_ || a.missing_ != b.missing_) return false;
    if (a.is_numeric()) {
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a.missing_[i] && a.values_[i] != b.values_[i]) return false;
      }
      return true;
    }
    if (a.levels() != b.levels()) return false;
    return a.codes_ == b.codes_;
  }

 private:
  Column() = default;

  std::string name_;
  ColumnKind kind_ = ColumnKind::kNumeric;
  std::vector<double> values_;
  std::shared_ptr<const Levels> levels_;
  std::vector<std::int32_t> codes_;
  std::vector<std::uint8_t> missing_;
};

using RowId = std::uint32_t;

/// Immutable table: feature columns plus an optional categorical label
/// column. Each row carries the id it had in the originally loaded table so
/// selections can be traced back (and hashed) after any number of subsets.
class Dataset {
 public:
  Dataset() = default;

  Dataset(std::vector<Column> columns, std::optional<std::string> label = std::nullopt,
          std::vector<RowId> row_ids = {})
      : columns_(std::move(columns)), row_ids_(std::move(row_ids)) {
    n_rows_ = columns_.empty() ? row_ids_.size() : columns_.front().size();
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      if (columns_[i].size() != n_rows_) {
        throw Error(ErrorCode::kRaggedRows, "column '" + columns_[i].name() + "' has " +
                                                std::to_string(columns_[i].size()) +
                                                " rows, expected " + std::to_string(n_rows_));
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (columns_[j].name() == columns_[i].name()) {
          throw Error(ErrorCode::kSchemaMismatch, "duplicate column '" + columns_[i].name() + "'");
        }
      }
    }
    if (row_ids_.empty()) {
      row_ids_.resize(n_rows_);
      std::iota(row_ids_.begin(), row_ids_.end(), RowId{0});
    } else if (row_ids_.size() != n_rows_) {
      throw Error(ErrorCode::kRaggedRows, "row id count differs from row count");
    }
    if (label) {
      const auto idx = index_of(*label);
      if (!idx) throw Error(ErrorCode::kUnknownColumn, "label column '" + *label + "'");
      if (!columns_[*idx].is_categorical()) {
        throw Error(ErrorCode::kSchemaMismatch, "label column must be categorical");
      }
      if (columns_[*idx].has_missing()) {
        throw Error(ErrorCode::kMissingLabel, "label column '" + *label + "' has missing values");
      }
      label_ = idx;
    }
  }

  std::size_t n_rows() const noexcept { return n_rows_; }
  std::size_t n_columns() const noexcept { return columns_.size(); }
  std::size_t n_features() const noexcept { return columns_.size() - (label_ ? 1 : 0); }
  const std::vector<Column>& columns() const noexcept { return columns_; }
  const Column& column(std::size_t i) const { return columns_.at(i); }

  std::optional<std::size_t> index_of(std::string_view name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      if (columns_[i].name() == name) return i;
    }
    return std::nullopt;
  }

  const Column& column(std::string_view name) const {
    const auto idx = index_of(name);
    if (!idx) throw Error(ErrorCode::kUnknownColumn, "no column '" + std::string(name) + "'");
    return columns_[*idx];
  }

  bool has_label() const noexcept { return label_.has_value(); }
  std::optional<std::size_t> label_index() const noexcept { return label_; }
  const Column& label() const {
    if (!label_) throw Error(ErrorCode::kMissingLabel, "dataset has no label column");
    return columns_[*label_];
  }
  std::optional<std::string> label_name() const {
    if (!label_) return std::nullopt;
    return columns_[*label_].name();
  }

  std::vector<std::size_t> feature_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      if (!label_ || i != *label_) out.push_back(i);
    }
    return out;
  }

  std::span<const RowId> row_ids() const noexcept { return row_ids_; }

  /// True when any non-label cell of `row` is masked.
  bool row_has_missing(std::size_t row) const noexcept {
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      if (label_ && c == *label_) continue;
      if (columns_[c].is_missing(row)) return true;
    }
    return false;
  }

  std::size_t missing_cell_count() const noexcept {
    std::size_t n = 0;
    for (const auto& c : columns_) n += c.missing_count();
    return n;
  }

  Dataset select_rows(std::span<const std::size_t> rows) const {
    std::vector<Column> cols;
    cols.reserve(columns_.size());
    for (const auto& c : columns_) cols.push_back(c.select(rows));
    std::vector<RowId> ids;
    ids.reserve(rows.size());
    for (auto r : rows) ids.push_back(row_ids_[r]);
    Dataset d;
    d.columns_ = std::move(cols);
    d.row_ids_ = std::move(ids);
    d.n_rows_ = rows.size();
    d.label_ = label_;
    return d;
  }

  /// Copy with one column swapped for `replacement` (same row count).
  Dataset with_column(std::size_t index, Column replacement) const {
    std::vector<Column> cols = columns_;
    cols.at(index) = std::move(replacement);
    return Dataset(std::move(cols), label_name(), row_ids_);
  }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.n_rows_ == b.n_rows_ && a.label_ == b.label_ && a.row_ids_ == b.row_ids_ &&
           a.columns_ == b.columns_;
  }

 private:
  std::vector<Column> columns_;
  std::vector<RowId> row_ids_;
  std::size_t n_rows_ = 0;
  std::optional<std::size_t> label_;
};

// ---------------------------------------------------------------------------
// Row and column selections.

struct MissingnessSplit {
  Dataset with_missing;
  Dataset without_missing;
};

inline std::vector<std::uint8_t> rows_with_missing(const Dataset& d) {
  std::vector<std::uint8_t> flags(d.n_rows(), 0);
  for (std::size_t r = 0; r < d.n_rows(); ++r) flags[r] = d.row_has_missing(r) ? 1 : 0;
  return flags;
}

inline MissingnessSplit split_by_missingness(const Dataset& d) {
  std::vector<std::size_t> with, without;
  for (std::size_t r = 0; r < d.n_rows(); ++r) {
    (d.row_has_missing(r) ? with : without).push_back(r);
  }
  return {d.select_rows(with), d.select_rows(without)};
}

struct TrainTestSplit {
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
};

/// Row indices of a stratified split. Each class contributes
/// round(test_fraction * class_size) rows to the test side; both sides keep
/// the original row order.
inline TrainTestSplit stratified_split_indices(const Dataset& d, double test_fraction,
                                               std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "test fraction must lie in (0, 1)");
  }
  const Column& label = d.label();
  const std::size_t n_classes = label.levels().size();
  std::vector<std::vector<std::size_t>> by_class(n_classes);
  for (std::size_t r = 0; r < d.n_rows(); ++r) by_class[label.code(r)].push_back(r);

  Rng rng(seed);
  std::vector<std::uint8_t> in_test(d.n_rows(), 0);
  for (std::size_t c = 0; c < n_classes; ++c) {
    auto& rows = by_class[c];
    if (rows.empty()) continue;
    const auto n_test =
        static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(rows.size())));
    if (n_test >= rows.size()) {
      throw Error(ErrorCode::kDegenerateSplit,
                  "class '" + label.levels()[c] + "' would be absent from the training side");
    }
    rng.shuffle(std::span<std::size_t>(rows));
    for (std::size_t i = 0; i < n_test; ++i) in_test[rows[i]] = 1;
  }
  TrainTestSplit split;
  for (std::size_t r = 0; r < d.n_rows(); ++r) {
    (in_test[r] ? split.test_rows : split.train_rows).push_back(r);
  }
  return split;
}

inline std::pair<Dataset, Dataset> stratified_split(const Dataset& d, double test_fraction,
                                                    std::uint64_t seed) {
  const auto split = stratified_split_indices(d, test_fraction, seed);
  return {d.select_rows(split.train_rows), d.select_rows(split.test_rows)};
}

/// Uniform sample of `n` row indices without replacement, in ascending order.
inline std::vector<std::size_t> sample_row_indices(std::size_t n_rows, std::size_t n,
                                                   std::uint64_t seed) {
  if (n > n_rows) {
    throw Error(ErrorCode::kSampleTooLarge,
                "cannot sample " + std::to_string(n) + " of " + std::to_string(n_rows) + " rows");
  }
  std::vector<std::size_t> all(n_rows);
  std::iota(all.begin(), all.end(), std::size_t{0});
  Rng rng(seed);
  // Partial Fisher-Yates: the first n slots end up holding the sample.
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(n_rows - i));
    std::swap(all[i], all[j]);
  }
  all.resize(n);
  std::sort(all.begin(), all.end());
  return all;
}

inline Dataset sample_rows(const Dataset& d, std::size_t n, std::uint64_t seed) {
  return d.select_rows(sample_row_indices(d.n_rows(), n, seed));
}

inline Dataset drop_columns(const Dataset& d, const std::set<std::string>& names) {
  for (const auto& name : names) {
    const auto idx = d.index_of(name);
    if (!idx) throw Error(ErrorCode::kUnknownColumn, "cannot drop unknown column '" + name + "'");
    if (d.label_index() == idx) {
      throw Error(ErrorCode::kLabelDropForbidden, "cannot drop label column '" + name + "'");
    }
  }
  std::vector<Column> kept;
  for (const auto& c : d.columns()) {
    if (!names.contains(c.name())) kept.push_back(c);
  }
  std::vector<RowId> ids(d.row_ids().begin(), d.row_ids().end());
  return Dataset(std::move(kept), d.label_name(), std::move(ids));
}

/// Names of the feature columns holding at least one masked cell.
inline std::set<std::string> columns_with_missing(const Dataset& d) {
  std::set<std::string> out;
  for (auto i : d.feature_indices()) {
    if (d.column(i).has_missing()) out.insert(d.column(i).name());
  }
  return out;
}

}  // namespace fairmiss

#endif  // FAIRMISS_DATASET_HPP
