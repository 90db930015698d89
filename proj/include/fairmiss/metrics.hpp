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

#ifndef FAIRMISS_METRICS_HPP
#define FAIRMISS_METRICS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairmiss/dataset.hpp"
#include "fairmiss/error.hpp"
#include "fairmiss/group.hpp"

namespace fairmiss {

/// Predicted labels aligned with the rows of an evaluated dataset. Codes refer
/// to the levels of that dataset's label column. `class_scores`, when
/// present, holds one probability vector per row.
struct Predictions {
  std::vector<std::int32_t> labels;
  std::vector<std::vector<double>> class_scores;

  std::size_t size() const noexcept { return labels.size(); }
  friend bool operator==(const Predictions&, const Predictions&) = default;
};

enum class Group { kPrivileged, kUnprivileged };

/// Difference of two count ratios, a/b - c/d, evaluated from the integer
/// cross products so that swapping the operands (or complementing both
/// numerators) negates the result bit-for-bit.
inline double ratio_difference(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
  const std::int64_t num = a * d - c * b;
  const std::int64_t den = b * d;
  return static_cast<double>(num) / static_cast<double>(den);
}

/// Favourable-label tallies of one labelling split by group.
struct GroupTallies {
  std::int64_t n_privileged = 0;
  std::int64_t n_unprivileged = 0;
  std::int64_t favourable_privileged = 0;
  std::int64_t favourable_unprivileged = 0;

  double rate(Group which) const {
    const auto n = which == Group::kPrivileged ? n_privileged : n_unprivileged;
    const auto k = which == Group::kPrivileged ? favourable_privileged : favourable_unprivileged;
    if (n == 0) {
      throw Error(ErrorCode::kEmptyGroup, which == Group::kPrivileged ? "privileged group is empty"
                                                                      : "unprivileged group is empty");
    }
    return static_cast<double>(k) / static_cast<double>(n);
  }

  void require_both_groups() const {
    if (n_privileged == 0) throw Error(ErrorCode::kEmptyGroup, "privileged group is empty");
    if (n_unprivileged == 0) throw Error(ErrorCode::kEmptyGroup, "unprivileged group is empty");
  }
};

inline GroupTallies group_tallies(std::span<const std::int32_t> labels, const Dataset& rows,
                                  const GroupSpec& g) {
  if (labels.size() != rows.n_rows()) {
    throw Error(ErrorCode::kLengthMismatch, "label source has " + std::to_string(labels.size()) +
                                                " entries for " + std::to_string(rows.n_rows()) + " rows");
  }
  const GroupFrame frame = resolve_group(rows, g);
  GroupTallies t;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const bool fav = labels[r] == frame.favourable_code;
    if (frame.privileged[r]) {
      ++t.n_privileged;
      t.favourable_privileged += fav;
    } else {
      ++t.n_unprivileged;
      t.favourable_unprivileged += fav;
    }
  }
  return t;
}

inline std::span<const std::int32_t> true_labels(const Dataset& d) { return d.label().codes(); }

/// Fraction of the selected group labelled with the favourable class.
inline double positive_rate(std::span<const std::int32_t> labels, const Dataset& rows,
                            const GroupSpec& g, Group which) {
  return group_tallies(labels, rows, g).rate(which);
}

inline double spd(const GroupTallies& t) {
  t.require_both_groups();
  return ratio_difference(t.favourable_privileged, t.n_privileged, t.favourable_unprivileged,
                          t.n_unprivileged);
}

/// Statistical parity difference: privileged minus unprivileged favourable rate.
inline double spd(std::span<const std::int32_t> labels, const Dataset& rows, const GroupSpec& g) {
  return spd(group_tallies(labels, rows, g));
}

inline double disparate_impact(const GroupTallies& t) {
  t.require_both_groups();
  if (t.favourable_privileged == 0) {
    throw Error(ErrorCode::kUndefinedRatio, "privileged favourable rate is zero");
  }
  return static_cast<double>(t.favourable_unprivileged * t.n_privileged) /
         static_cast<double>(t.favourable_privileged * t.n_unprivileged);
}

/// Unprivileged over privileged favourable rate.
inline double disparate_impact(std::span<const std::int32_t> labels, const Dataset& rows,
                               const GroupSpec& g) {
  return disparate_impact(group_tallies(labels, rows, g));
}

struct ConfusionCounts {
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::int64_t total() const noexcept { return tp + fp + tn + fn; }
  std::int64_t positives() const noexcept { return tp + fn; }
  std::int64_t negatives() const noexcept { return tn + fp; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct GroupConfusion {
  ConfusionCounts privileged;
  ConfusionCounts unprivileged;
  friend bool operator==(const GroupConfusion&, const GroupConfusion&) = default;
};

inline void check_aligned(const Predictions& pred, const Dataset& truth) {
  if (pred.size() != truth.n_rows()) {
    throw Error(ErrorCode::kLengthMismatch, std::to_string(pred.size()) + " predictions for " +
                                                std::to_string(truth.n_rows()) + " rows");
  }
}

/// Positive means the favourable class; every other class is negative.
inline GroupConfusion group_confusion(const Predictions& pred, const Dataset& truth,
                                      const GroupSpec& g) {
  check_aligned(pred, truth);
  const GroupFrame frame = resolve_group(truth, g);
  const auto y = truth.label().codes();
  GroupConfusion gc;
  for (std::size_t r = 0; r < y.size(); ++r) {
    ConfusionCounts& c = frame.privileged[r] ? gc.privileged : gc.unprivileged;
    const bool actual = y[r] == frame.favourable_code;
    const bool predicted = pred.labels[r] == frame.favourable_code;
    if (actual) {
      (predicted ? c.tp : c.fn) += 1;
    } else {
      (predicted ? c.fp : c.tn) += 1;
    }
  }
  if (gc.privileged.total() == 0) throw Error(ErrorCode::kEmptyGroup, "privileged group is empty");
  if (gc.unprivileged.total() == 0) throw Error(ErrorCode::kEmptyGroup, "unprivileged group is empty");
  return gc;
}

inline double true_positive_rate_difference(const GroupConfusion& gc) {
  if (gc.privileged.positives() == 0 || gc.unprivileged.positives() == 0) {
    throw Error(ErrorCode::kUndefinedRate, "a group has no favourable-class rows");
  }
  return ratio_difference(gc.privileged.tp, gc.privileged.positives(), gc.unprivileged.tp,
                          gc.unprivileged.positives());
}

inline double false_positive_rate_difference(const GroupConfusion& gc) {
  if (gc.privileged.negatives() == 0 || gc.unprivileged.negatives() == 0) {
    throw Error(ErrorCode::kUndefinedRate, "a group has no unfavourable-class rows");
  }
  return ratio_difference(gc.privileged.fp, gc.privileged.negatives(), gc.unprivileged.fp,
                          gc.unprivileged.negatives());
}

/// TPR(privileged) - TPR(unprivileged).
inline double equal_opportunity_difference(const Predictions& pred, const Dataset& truth,
                                           const GroupSpec& g) {
  return true_positive_rate_difference(group_confusion(pred, truth, g));
}

/// 0.5 * [(FPR_priv - FPR_unpriv) + (TPR_priv - TPR_unpriv)].
inline double average_odds_difference(const Predictions& pred, const Dataset& truth,
                                      const GroupSpec& g) {
  const GroupConfusion gc = group_confusion(pred, truth, g);
  const double dfpr = false_positive_rate_difference(gc);
  const double dtpr = true_positive_rate_difference(gc);
  return 0.5 * (dfpr + dtpr);
}

inline double accuracy(const Predictions& pred, const Dataset& truth) {
  check_aligned(pred, truth);
  if (truth.n_rows() == 0) throw Error(ErrorCode::kInvalidArgument, "accuracy of an empty dataset");
  const auto y = truth.label().codes();
  std::int64_t correct = 0;
  for (std::size_t r = 0; r < y.size(); ++r) correct += pred.labels[r] == y[r];
  return static_cast<double>(correct) / static_cast<double>(y.size());
}

/// Fairness summary of one labelling. Components that are undefined for the
/// data at hand (zero denominators) are left empty rather than set to 0.
struct FairnessReport {
  double spd = 0.0;
  std::optional<double> di;
  std::optional<double> eod;
  std::optional<double> avg_odds;
  std::optional<double> accuracy;
  std::pair<double, double> group_positive_rates{0.0, 0.0};
  std::int64_t n_privileged = 0;
  std::int64_t n_unprivileged = 0;
};

namespace detail {
template <typename F>
std::optional<double> defined_or_empty(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kUndefinedRatio || e.code() == ErrorCode::kUndefinedRate) {
      return std::nullopt;
    }
    throw;
  }
}
}  // namespace detail

/// Dataset-level audit of a labelling (no ground truth comparison).
inline FairnessReport audit_labels(std::span<const std::int32_t> labels, const Dataset& rows,
                                   const GroupSpec& g) {
  const GroupTallies t = group_tallies(labels, rows, g);
  FairnessReport r;
  r.spd = spd(t);
  r.di = detail::defined_or_empty([&] { return disparate_impact(t); });
  r.group_positive_rates = {t.rate(Group::kPrivileged), t.rate(Group::kUnprivileged)};
  r.n_privileged = t.n_privileged;
  r.n_unprivileged = t.n_unprivileged;
  return r;
}

inline FairnessReport audit_dataset(const Dataset& d, const GroupSpec& g) {
  return audit_labels(true_labels(d), d, g);
}

/// Audit of predictions against ground truth: adds accuracy, EOD and
/// average odds to the label-only metrics.
inline FairnessReport evaluate_predictions(const Predictions& pred, const Dataset& truth,
                                           const GroupSpec& g) {
  check_aligned(pred, truth);
  FairnessReport r = audit_labels(pred.labels, truth, g);
  const GroupConfusion gc = group_confusion(pred, truth, g);
  r.eod = detail::defined_or_empty([&] { return true_positive_rate_difference(gc); });
  r.avg_odds = detail::defined_or_empty([&] {
    const double dfpr = false_positive_rate_difference(gc);
    return 0.5 * (dfpr + true_positive_rate_difference(gc));
  });
  r.accuracy = accuracy(pred, truth);
  return r;
}

inline nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline void to_json(nlohmann::json& j, const FairnessReport& r) {
  j = nlohmann::json{{"spd", r.spd},
                     {"di", optional_json(r.di)},
                     {"eod", optional_json(r.eod)},
                     {"avg_odds", optional_json(r.avg_odds)},
                     {"accuracy", optional_json(r.accuracy)},
                     {"positive_rate_privileged", r.group_positive_rates.first},
                     {"positive_rate_unprivileged", r.group_positive_rates.second},
                     {"n_privileged", r.n_privileged},
                     {"n_unprivileged", r.n_unprivileged}};
}

}  // namespace fairmiss

#endif  // FAIRMISS_METRICS_HPP
