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

#ifndef FAIRMISS_MODELS_CART_HPP
#define FAIRMISS_MODELS_CART_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairmiss/models/common.hpp"
#include "fairmiss/random.hpp"

namespace fairmiss::models {

struct CartParams {
  std::size_t max_depth = 30;
  std::size_t min_split = 20;
  std::size_t min_bucket = 0;  // 0 means round(min_split / 3), at least 1
  double complexity = 0.01;
  std::size_t max_surrogates = 5;
  bool use_surrogates = true;
  std::size_t mtry = 0;  // features tried per node, 0 means all

  void validate() const {
    if (max_depth < 1) throw Error(ErrorCode::kInvalidArgument, "max_depth must be at least 1");
    if (min_split < 2) throw Error(ErrorCode::kInvalidArgument, "min_split must be at least 2");
    if (!(complexity >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "complexity must be non-negative");
  }
  std::size_t bucket() const noexcept {
    if (min_bucket > 0) return min_bucket;
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(static_cast<double>(min_split) / 3.0)));
  }
};

enum class MissingPolicy { kSurrogate, kRandomChild, kWeightedAggregate };

inline std::string_view to_string(MissingPolicy p) {
  switch (p) {
    case MissingPolicy::kSurrogate: return "surrogate";
    case MissingPolicy::kRandomChild: return "random_child";
    case MissingPolicy::kWeightedAggregate: return "weighted_aggregate";
  }
  return "surrogate";
}

inline MissingPolicy parse_missing_policy(std::string_view s) {
  if (s == "surrogate") return MissingPolicy::kSurrogate;
  if (s == "random_child") return MissingPolicy::kRandomChild;
  if (s == "weighted_aggregate") return MissingPolicy::kWeightedAggregate;
  throw Error(ErrorCode::kInvalidArgument, "unknown missing-value policy '" + std::string(s) + "'");
}

struct PredictOptions {
  MissingPolicy policy = MissingPolicy::kSurrogate;
  std::uint64_t seed = 0;
};

/// A binary condition on one feature. Numeric: x < threshold goes left,
/// reversed when `flip`. Categorical: per training level 1 left, 0 right,
/// -1 unresolved (level absent from the node at fit time).
struct Split {
  std::size_t feature = 0;
  double threshold = 0.0;
  bool flip = false;
  std::vector<std::int8_t> left;
  double agreement = 1.0;  // surrogates only

  bool is_numeric() const noexcept { return left.empty(); }
};

struct CartNode {
  std::vector<double> counts;  // training rows per class reaching the node
  std::int32_t left = -1;
  std::int32_t right = -1;
  Split primary;
  std::vector<Split> surrogates;
  bool default_left = true;
  double improvement = 0.0;

  bool is_leaf() const noexcept { return left < 0; }
  double n() const { return std::accumulate(counts.begin(), counts.end(), 0.0); }
  std::vector<double> distribution() const {
    std::vector<double> p = counts;
    const double total = n();
    for (auto& v : p) v = total > 0 ? v / total : 0.0;
    return p;
  }
};

struct CartModel {
  TrainingSchema schema;
  CartParams params;
  std::vector<CartNode> nodes;  // nodes[0] is the root

  std::size_t n_leaves() const {
    return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const auto& n) { return n.is_leaf(); }));
  }
  std::size_t depth() const { return depth_of(0); }

 private:
  std::size_t depth_of(std::size_t i) const {
    const auto& n = nodes[i];
    if (n.is_leaf()) return 0;
    return 1 + std::max(depth_of(static_cast<std::size_t>(n.left)), depth_of(static_cast<std::size_t>(n.right)));
  }
};

namespace detail {

// Column data in training indices, shared by split search and routing.
struct CartData {
  std::vector<bool> numeric;
  std::vector<std::vector<double>> x;          // numeric features
  std::vector<std::vector<std::int32_t>> c;    // categorical codes, -1 missing
  std::vector<std::size_t> n_levels;
  std::vector<std::int32_t> y;
  std::size_t k = 0;

  bool missing(std::size_t j, std::uint32_t r) const {
    return numeric[j] ? std::isnan(x[j][r]) : c[j][r] < 0;
  }
};

// -1 unresolved, 0 right, 1 left.
inline int route(const Split& s, const CartData& d, std::uint32_t r) {
  if (s.is_numeric()) {
    const double v = d.x[s.feature][r];
    if (std::isnan(v)) return -1;
    return (v < s.threshold) != s.flip ? 1 : 0;
  }
  const auto code = d.c[s.feature][r];
  if (code < 0) return -1;
  return s.left[static_cast<std::size_t>(code)];
}

struct NodeRows {
  std::vector<std::uint32_t> rows;
  std::vector<std::vector<std::uint32_t>> sorted;  // per feature, observed rows by value (numeric only)
};

inline double gini_gain(const std::vector<double>& total, const std::vector<double>& left) {
  double n = 0, nl = 0, st = 0, sl = 0, sr = 0;
  for (std::size_t k = 0; k < total.size(); ++k) {
    const double r = total[k] - left[k];
    n += total[k];
    nl += left[k];
    st += total[k] * total[k];
    sl += left[k] * left[k];
    sr += r * r;
  }
  const double nr = n - nl;
  if (n <= 0 || nl <= 0 || nr <= 0) return 0.0;
  return sl / nl + sr / nr - st / n;
}

class CartBuilder {
 public:
  CartBuilder(const CartData& d, const CartParams& p, std::uint64_t seed)
      : d_(d), p_(p), rng_(seed), dir_(d.y.size(), -1) {}

  std::vector<CartNode> build(NodeRows root) {
    const auto counts = count(root.rows);
    root_risk_ = risk(counts);
    alpha_ = p_.complexity * root_risk_;
    grow(std::move(root), 0);
    prune(0);
    return compact();
  }

 private:
  struct Candidate {
    double gain = 0.0;
    Split split;
  };

  std::vector<double> count(const std::vector<std::uint32_t>& rows) const {
    std::vector<double> c(d_.k, 0.0);
    for (auto r : rows) c[static_cast<std::size_t>(d_.y[r])] += 1.0;
    return c;
  }
  static double risk(const std::vector<double>& c) {
    return std::accumulate(c.begin(), c.end(), 0.0) - *std::max_element(c.begin(), c.end());
  }

  std::int32_t grow(NodeRows nr, std::size_t depth) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({});
    nodes_[id].counts = count(nr.rows);
    const double node_risk = risk(nodes_[id].counts);
    if (depth >= p_.max_depth || nr.rows.size() < p_.min_split || node_risk <= alpha_ || node_risk == 0.0) return id;

    std::optional<Candidate> best;
    for (auto j : features_to_try()) {
      auto cand = d_.numeric[j] ? best_numeric(j, nr) : best_categorical(j, nr.rows);
      if (cand && cand->gain > 0.0 && (!best || cand->gain > best->gain)) best = std::move(cand);
    }
    if (!best) return id;

    CartNode& node = nodes_[id];
    node.primary = std::move(best->split);
    node.improvement = best->gain;
    std::size_t n_left = 0, n_right = 0;
    for (auto r : nr.rows) {
      dir_[r] = static_cast<std::int8_t>(route(node.primary, d_, r));
      if (dir_[r] == 1) ++n_left;
      if (dir_[r] == 0) ++n_right;
    }
    node.default_left = n_left >= n_right;
    if (p_.use_surrogates) node.surrogates = surrogates(node.primary, node.default_left, nr);
    for (auto r : nr.rows) {
      if (dir_[r] >= 0) continue;
      int side = -1;
      for (const auto& s : node.surrogates) {
        side = route(s, d_, r);
        if (side >= 0) break;
      }
      dir_[r] = static_cast<std::int8_t>(side >= 0 ? side : (node.default_left ? 1 : 0));
    }

    NodeRows left, right;
    for (auto r : nr.rows) (dir_[r] ? left : right).rows.push_back(r);
    left.sorted.resize(nr.sorted.size());
    right.sorted.resize(nr.sorted.size());
    for (std::size_t j = 0; j < nr.sorted.size(); ++j) {
      for (auto r : nr.sorted[j]) (dir_[r] ? left : right).sorted[j].push_back(r);
    }
    nr = {};
    const auto l = grow(std::move(left), depth + 1);
    const auto r = grow(std::move(right), depth + 1);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  std::vector<std::size_t> features_to_try() {
    const std::size_t p = d_.numeric.size();
    std::vector<std::size_t> all(p);
    std::iota(all.begin(), all.end(), 0);
    if (p_.mtry == 0 || p_.mtry >= p) return all;
    rng_.shuffle(std::span<std::size_t>(all));
    all.resize(p_.mtry);
    std::sort(all.begin(), all.end());
    return all;
  }

  std::optional<Candidate> best_numeric(std::size_t j, const NodeRows& nr) const {
    const auto& list = nr.sorted[j];
    const auto& x = d_.x[j];
    const std::size_t bucket = p_.bucket();
    if (list.size() < 2 * bucket) return std::nullopt;
    const auto total = count(list);
    std::vector<double> left(d_.k, 0.0);
    std::optional<Candidate> best;
    for (std::size_t i = 0; i + 1 < list.size(); ++i) {
      left[static_cast<std::size_t>(d_.y[list[i]])] += 1.0;
      const double a = x[list[i]], b = x[list[i + 1]];
      if (!(a < b)) continue;
      if (i + 1 < bucket || list.size() - i - 1 < bucket) continue;
      const double gain = gini_gain(total, left);
      if (!best || gain > best->gain) {
        double mid = a + (b - a) / 2.0;
        if (!(mid > a)) mid = b;
        best = Candidate{gain, Split{j, mid, false, {}, 1.0}};
      }
    }
    return best;
  }

  std::optional<Candidate> best_categorical(std::size_t j, const std::vector<std::uint32_t>& rows) const {
    const std::size_t L = d_.n_levels[j];
    std::vector<std::vector<double>> by_level(L, std::vector<double>(d_.k, 0.0));
    std::vector<double> n_level(L, 0.0);
    for (auto r : rows) {
      const auto code = d_.c[j][r];
      if (code < 0) continue;
      by_level[static_cast<std::size_t>(code)][static_cast<std::size_t>(d_.y[r])] += 1.0;
      n_level[static_cast<std::size_t>(code)] += 1.0;
    }
    std::vector<std::size_t> present;
    std::vector<double> total(d_.k, 0.0);
    for (std::size_t l = 0; l < L; ++l) {
      if (n_level[l] == 0) continue;
      present.push_back(l);
      for (std::size_t k = 0; k < d_.k; ++k) total[k] += by_level[l][k];
    }
    if (present.size() < 2) return std::nullopt;
    const double n_obs = std::accumulate(total.begin(), total.end(), 0.0);
    const auto bucket = static_cast<double>(p_.bucket());

    auto make = [&](const std::vector<std::size_t>& left_levels, double gain) {
      Split s{j, 0.0, false, std::vector<std::int8_t>(L, -1), 1.0};
      for (auto l : present) s.left[l] = 0;
      for (auto l : left_levels) s.left[l] = 1;
      return Candidate{gain, std::move(s)};
    };
    std::optional<Candidate> best;
    auto consider = [&](const std::vector<std::size_t>& left_levels) {
      std::vector<double> left(d_.k, 0.0);
      double nl = 0;
      for (auto l : left_levels) {
        for (std::size_t k = 0; k < d_.k; ++k) left[k] += by_level[l][k];
        nl += n_level[l];
      }
      if (nl < bucket || n_obs - nl < bucket) return;
      const double gain = gini_gain(total, left);
      if (!best || gain > best->gain) best = make(left_levels, gain);
    };

    if (d_.k == 2) {
      // Two classes: ordering levels by class-1 share makes the best prefix
      // the best subset split.
      std::stable_sort(present.begin(), present.end(), [&](std::size_t a, std::size_t b) {
        return by_level[a][1] / n_level[a] < by_level[b][1] / n_level[b];
      });
      std::vector<std::size_t> prefix;
      for (std::size_t i = 0; i + 1 < present.size(); ++i) {
        prefix.push_back(present[i]);
        consider(prefix);
      }
    } else {
      for (auto l : present) consider({l});
    }
    return best;
  }

  std::vector<Split> surrogates(const Split& primary, bool default_left, const NodeRows& nr) const {
    std::vector<Split> out;
    for (std::size_t j = 0; j < d_.numeric.size(); ++j) {
      if (j == primary.feature) continue;
      std::optional<Split> s = d_.numeric[j] ? numeric_surrogate(j, nr.sorted[j], default_left)
                                       : categorical_surrogate(j, nr.rows, default_left);
      if (s) out.push_back(std::move(*s));
    }
    std::stable_sort(out.begin(), out.end(), [](const Split& a, const Split& b) { return a.agreement > b.agreement; });
    if (out.size() > p_.max_surrogates) out.resize(p_.max_surrogates);
    return out;
  }

  std::optional<Split> numeric_surrogate(std::size_t j, const std::vector<std::uint32_t>& list,
                                         bool default_left) const {
    std::vector<std::uint32_t> co;
    for (auto r : list) {
      if (dir_[r] >= 0) co.push_back(r);
    }
    if (co.size() < 2) return std::nullopt;
    double n_left = 0;
    for (auto r : co) n_left += dir_[r];
    const double n = static_cast<double>(co.size());
    const double blind = default_left ? n_left : n - n_left;
    const auto& x = d_.x[j];
    // agree(t) = left rows below t + right rows at or above t.
    double below_left = 0, below_right = 0;
    double best_agree = -1;
    Split best{j, 0.0, false, {}, 0.0};
    for (std::size_t i = 0; i + 1 < co.size(); ++i) {
      (dir_[co[i]] ? below_left : below_right) += 1.0;
      const double a = x[co[i]], b = x[co[i + 1]];
      if (!(a < b)) continue;
      const double agree = below_left + (n - n_left - below_right);
      const double flipped = n - agree;
      const double value = std::max(agree, flipped);
      if (value > best_agree) {
        best_agree = value;
        double mid = a + (b - a) / 2.0;
        if (!(mid > a)) mid = b;
        best = Split{j, mid, flipped > agree, {}, 0.0};
      }
    }
    if (!(best_agree > blind)) return std::nullopt;
    best.agreement = best_agree / n;
    return best;
  }

  std::optional<Split> categorical_surrogate(std::size_t j, const std::vector<std::uint32_t>& rows,
                                             bool default_left) const {
    const std::size_t L = d_.n_levels[j];
    std::vector<double> left(L, 0.0), right(L, 0.0);
    double n = 0, n_left = 0;
    for (auto r : rows) {
      const auto code = d_.c[j][r];
      if (dir_[r] < 0 || code < 0) continue;
      (dir_[r] ? left : right)[static_cast<std::size_t>(code)] += 1.0;
      n += 1;
      n_left += dir_[r];
    }
    if (n == 0) return std::nullopt;
    const double blind = default_left ? n_left : n - n_left;
    Split s{j, 0.0, false, std::vector<std::int8_t>(L, -1), 0.0};
    double agree = 0;
    for (std::size_t l = 0; l < L; ++l) {
      if (left[l] + right[l] == 0) continue;
      const bool go_left = left[l] > right[l] || (left[l] == right[l] && default_left);
      s.left[l] = go_left ? 1 : 0;
      agree += go_left ? left[l] : right[l];
    }
    if (!(agree > blind)) return std::nullopt;
    s.agreement = agree / n;
    return s;
  }

  // Bottom-up cost-complexity pruning at alpha. Returns {subtree risk, leaves}.
  std::pair<double, std::size_t> prune(std::int32_t id) {
    CartNode& node = nodes_[static_cast<std::size_t>(id)];
    const double own = risk(node.counts);
    if (node.is_leaf()) return {own, 1};
    const auto [rl, ll] = prune(node.left);
    const auto [rr, lr] = prune(nodes_[static_cast<std::size_t>(id)].right);
    CartNode& n2 = nodes_[static_cast<std::size_t>(id)];
    const double sub = rl + rr;
    const std::size_t leaves = ll + lr;
    if ((own - sub) / static_cast<double>(leaves - 1) <= alpha_) {
      n2.left = n2.right = -1;
      n2.surrogates.clear();
      n2.primary = {};
      n2.improvement = 0.0;
      return {own, 1};
    }
    return {sub, leaves};
  }

  std::vector<CartNode> compact() {
    std::vector<CartNode> out;
    // Preorder renumbering keeps the root first and children after parents.
    std::function<std::int32_t(std::int32_t)> copy = [&](std::int32_t id) -> std::int32_t {
      const auto at = static_cast<std::int32_t>(out.size());
      out.push_back(nodes_[static_cast<std::size_t>(id)]);
      if (!out[at].is_leaf()) {
        const auto l = copy(nodes_[static_cast<std::size_t>(id)].left);
        const auto r = copy(nodes_[static_cast<std::size_t>(id)].right);
        out[at].left = l;
        out[at].right = r;
      }
      return at;
    };
    copy(0);
    return out;
  }

  const CartData& d_;
  const CartParams& p_;
  Rng rng_;
  std::vector<std::int8_t> dir_;
  std::vector<CartNode> nodes_;
  double root_risk_ = 0.0;
  double alpha_ = 0.0;
};

// Column data of `rows` in the model's training indices.
inline CartData cart_data(const TrainingSchema& schema, const Dataset& rows) {
  const BoundRows b(schema, rows);
  CartData d;
  const std::size_t n = rows.n_rows();
  d.k = schema.classes.size();
  for (std::size_t j = 0; j < schema.features.size(); ++j) {
    const bool numeric = schema.features[j].kind == ColumnKind::kNumeric;
    d.numeric.push_back(numeric);
    d.n_levels.push_back(schema.features[j].levels.size());
    std::vector<double> x;
    std::vector<std::int32_t> c;
    if (numeric) {
      x.resize(n);
      for (std::size_t r = 0; r < n; ++r) {
        x[r] = b.missing(j, r) ? std::numeric_limits<double>::quiet_NaN() : b.number(j, r);
      }
    } else {
      c.resize(n);
      for (std::size_t r = 0; r < n; ++r) c[r] = b.code(j, r);
    }
    d.x.push_back(std::move(x));
    d.c.push_back(std::move(c));
  }
  return d;
}

}  // namespace detail

inline CartModel fit_cart(const Dataset& train, const CartParams& params, std::uint64_t seed,
                          std::vector<std::string>* warnings = nullptr) {
  params.validate();
  CartModel m;
  m.schema = training_schema(train);
  m.params = params;
  auto d = detail::cart_data(m.schema, train);
  d.y.assign(train.label().codes().begin(), train.label().codes().end());

  const auto counts = class_counts(train);
  if (std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }) < 2 && warnings) {
    warnings->push_back("training set has a single class; the tree is a constant predictor");
  }

  detail::NodeRows root;
  root.rows.resize(train.n_rows());
  std::iota(root.rows.begin(), root.rows.end(), 0U);
  for (std::size_t j = 0; j < d.numeric.size(); ++j) {
    std::vector<std::uint32_t> list;
    for (auto r : root.rows) {
      if (!d.numeric[j]) break;
      if (!std::isnan(d.x[j][r])) list.push_back(r);
    }
    std::stable_sort(list.begin(), list.end(), [&](auto a, auto b) { return d.x[j][a] < d.x[j][b]; });
    root.sorted.push_back(std::move(list));
  }
  detail::CartBuilder builder(d, m.params, seed);
  m.nodes = builder.build(std::move(root));
  return m;
}

namespace detail {

inline void accumulate_leaf(const CartModel& m, const CartData& d, std::uint32_t r, std::int32_t id, double weight,
                            std::vector<double>& out) {
  const CartNode& node = m.nodes[static_cast<std::size_t>(id)];
  if (node.is_leaf()) {
    const auto p = node.distribution();
    for (std::size_t k = 0; k < p.size(); ++k) out[k] += weight * p[k];
    return;
  }
  const int side = route(node.primary, d, r);
  if (side >= 0) {
    accumulate_leaf(m, d, r, side ? node.left : node.right, weight, out);
    return;
  }
  const double nl = m.nodes[static_cast<std::size_t>(node.left)].n();
  const double nr = m.nodes[static_cast<std::size_t>(node.right)].n();
  accumulate_leaf(m, d, r, node.left, weight * nl / (nl + nr), out);
  accumulate_leaf(m, d, r, node.right, weight * nr / (nl + nr), out);
}

inline std::vector<double> cart_scores(const CartModel& m, const CartData& d, std::uint32_t r,
                                       const PredictOptions& opt) {
  if (opt.policy == MissingPolicy::kWeightedAggregate) {
    std::vector<double> out(m.schema.classes.size(), 0.0);
    accumulate_leaf(m, d, r, 0, 1.0, out);
    return out;
  }
  std::int32_t id = 0;
  std::optional<Rng> rng;
  while (!m.nodes[static_cast<std::size_t>(id)].is_leaf()) {
    const CartNode& node = m.nodes[static_cast<std::size_t>(id)];
    int side = route(node.primary, d, r);
    if (side < 0 && opt.policy == MissingPolicy::kRandomChild) {
      if (!rng) rng.emplace(derive_seed(opt.seed, r));
      const double nl = m.nodes[static_cast<std::size_t>(node.left)].n();
      const double nr = m.nodes[static_cast<std::size_t>(node.right)].n();
      side = rng->uniform() * (nl + nr) < nl ? 1 : 0;
    }
    if (side < 0 && m.params.use_surrogates) {
      for (const auto& s : node.surrogates) {
        side = route(s, d, r);
        if (side >= 0) break;
      }
    }
    if (side < 0) side = node.default_left ? 1 : 0;
    id = side ? node.left : node.right;
  }
  return m.nodes[static_cast<std::size_t>(id)].distribution();
}

}  // namespace detail

/// Per-row class distributions, in the model's class order.
inline std::vector<std::vector<double>> predict_scores(const CartModel& m, const Dataset& rows,
                                                       const PredictOptions& opt = {}) {
  const auto d = detail::cart_data(m.schema, rows);
  std::vector<std::vector<double>> out(rows.n_rows());
  for (std::size_t r = 0; r < rows.n_rows(); ++r) {
    out[r] = detail::cart_scores(m, d, static_cast<std::uint32_t>(r), opt);
  }
  return out;
}

inline Predictions predict(const CartModel& m, const Dataset& rows, const PredictOptions& opt = {}) {
  auto scores = predict_scores(m, rows, opt);
  std::vector<std::size_t> cls(scores.size());
  for (std::size_t r = 0; r < scores.size(); ++r) cls[r] = argmax(scores[r]);
  return to_predictions(m.schema.classes, rows, cls, std::move(scores));
}

/// Unnormalised impurity decrease per feature index.
inline std::vector<double> raw_importance(const CartModel& m) {
  std::vector<double> imp(m.schema.features.size(), 0.0);
  for (const auto& n : m.nodes) {
    if (!n.is_leaf()) imp[n.primary.feature] += n.improvement;
  }
  return imp;
}

inline void to_json(nlohmann::json& j, const Split& s, const TrainingSchema& schema) {
  const auto& f = schema.features[s.feature];
  j = nlohmann::json{{"column", f.name}};
  if (s.is_numeric()) {
    j["threshold"] = s.threshold;
    j["left_when"] = s.flip ? ">=" : "<";
  } else {
    std::vector<std::string> left, right;
    for (std::size_t l = 0; l < s.left.size(); ++l) {
      if (s.left[l] == 1) left.push_back(f.levels[l]);
      if (s.left[l] == 0) right.push_back(f.levels[l]);
    }
    j["left_levels"] = left;
    j["right_levels"] = right;
  }
}

inline nlohmann::json node_json(const CartModel& m, std::int32_t id) {
  const CartNode& n = m.nodes[static_cast<std::size_t>(id)];
  nlohmann::json j{{"counts", n.counts}};
  if (n.is_leaf()) return j;
  nlohmann::json primary;
  to_json(primary, n.primary, m.schema);
  j["split"] = primary;
  j["improvement"] = n.improvement;
  j["default"] = n.default_left ? "left" : "right";
  j["surrogates"] = nlohmann::json::array();
  for (const auto& s : n.surrogates) {
    nlohmann::json js;
    to_json(js, s, m.schema);
    js["agreement"] = s.agreement;
    j["surrogates"].push_back(js);
  }
  j["left"] = node_json(m, n.left);
  j["right"] = node_json(m, n.right);
  return j;
}

inline void to_json(nlohmann::json& j, const CartParams& p) {
  j = nlohmann::json{{"max_depth", p.max_depth},           {"min_split", p.min_split},
                     {"min_bucket", p.bucket()},           {"complexity", p.complexity},
                     {"max_surrogates", p.max_surrogates}, {"use_surrogates", p.use_surrogates},
                     {"mtry", p.mtry}};
}

inline void to_json(nlohmann::json& j, const CartModel& m) {
  j = nlohmann::json{{"type", "cart"}, {"schema", m.schema}, {"params", m.params}, {"root", node_json(m, 0)}};
}

}  // namespace fairmiss::models

#endif  // FAIRMISS_MODELS_CART_HPP
