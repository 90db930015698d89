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

#ifndef FAIRMISS_OCTAGON_HPP
#define FAIRMISS_OCTAGON_HPP

// Geometry of the (accuracy, SPD) plane for binary labellings of a fixed
// dataset. A labelling is summarised by four counts: how many true positives
// and how many true negatives of each group receive the favourable label.
// Accuracy and SPD are linear in those counts, so the set of reachable points
// is the image of a 4-box under a linear map: a zonotope with at most eight
// vertices. Starting from the perfect labelling, each vertex is reached by
// flipping whole blocks (all positives or all negatives of one group) in an
// order fixed by which group is larger.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairmiss/dataset.hpp"
#include "fairmiss/error.hpp"
#include "fairmiss/group.hpp"
#include "fairmiss/metrics.hpp"

namespace fairmiss {

/// Class-by-group tallies of a labelled dataset.
struct DatasetStats {
  std::int64_t pos_priv = 0;
  std::int64_t neg_priv = 0;
  std::int64_t pos_unpriv = 0;
  std::int64_t neg_unpriv = 0;

  std::int64_t n_priv() const noexcept { return pos_priv + neg_priv; }
  std::int64_t n_unpriv() const noexcept { return pos_unpriv + neg_unpriv; }
  std::int64_t n() const noexcept { return n_priv() + n_unpriv(); }
  std::int64_t positives() const noexcept { return pos_priv + pos_unpriv; }
  std::int64_t negatives() const noexcept { return neg_priv + neg_unpriv; }

  void validate() const {
    if (pos_priv < 0 || neg_priv < 0 || pos_unpriv < 0 || neg_unpriv < 0) {
      throw Error(ErrorCode::kInvalidArgument, "negative tally");
    }
    if (n_priv() == 0) throw Error(ErrorCode::kEmptyGroup, "privileged group is empty");
    if (n_unpriv() == 0) throw Error(ErrorCode::kEmptyGroup, "unprivileged group is empty");
  }

  friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

struct TradeoffPoint {
  std::string label;
  double accuracy = 0.0;
  double spd = 0.0;
};

/// Favourable-label assignments of a binary labelling: predicted-favourable
/// counts among the true positives and true negatives of each group.
struct LabellingCounts {
  std::int64_t tp_priv = 0;
  std::int64_t fp_priv = 0;
  std::int64_t tp_unpriv = 0;
  std::int64_t fp_unpriv = 0;
};

/// Accuracy and SPD of a labelling. Every point in this header goes through
/// this function, so octagon vertices and enumerated labellings that share
/// counts compare equal bit-for-bit.
inline std::pair<double, double> tradeoff_of(const DatasetStats& s, const LabellingCounts& c) {
  const std::int64_t correct = c.tp_priv + (s.neg_priv - c.fp_priv) + c.tp_unpriv + (s.neg_unpriv - c.fp_unpriv);
  const double acc = static_cast<double>(correct) / static_cast<double>(s.n());
  const double spd_value =
      ratio_difference(c.tp_priv + c.fp_priv, s.n_priv(), c.tp_unpriv + c.fp_unpriv, s.n_unpriv());
  return {acc, spd_value};
}

struct OctagonVertex {
  double accuracy = 0.0;
  double spd = 0.0;
  LabellingCounts labelling;
};

struct OctagonSpec {
  /// Starts at the perfect labelling, then runs through decreasing SPD to the
  /// all-wrong labelling and back up. Counter-clockwise when drawn with SPD
  /// on the horizontal axis and accuracy on the vertical one.
  std::array<OctagonVertex, 8> vertices;
  bool assumption_satisfied = false;  // favourable class is the majority
  bool degenerate = false;            // some vertices coincide
};

inline DatasetStats dataset_stats(const Dataset& d, const GroupSpec& g) {
  const GroupFrame frame = resolve_group(d, g);
  const auto y = d.label().codes();
  DatasetStats s;
  for (std::size_t r = 0; r < y.size(); ++r) {
    const bool pos = y[r] == frame.favourable_code;
    if (frame.privileged[r]) {
      (pos ? s.pos_priv : s.neg_priv) += 1;
    } else {
      (pos ? s.pos_unpriv : s.neg_unpriv) += 1;
    }
  }
  s.validate();
  return s;
}

namespace detail {

enum class BlockFlip { kDropPrivPositives, kFlipPrivNegatives, kDropUnprivPositives, kFlipUnprivNegatives };

inline void apply_flip(const DatasetStats& s, LabellingCounts& c, BlockFlip f) {
  switch (f) {
    case BlockFlip::kDropPrivPositives: c.tp_priv = 0; break;
    case BlockFlip::kFlipPrivNegatives: c.fp_priv = s.neg_priv; break;
    case BlockFlip::kDropUnprivPositives: c.tp_unpriv = 0; break;
    case BlockFlip::kFlipUnprivNegatives: c.fp_unpriv = s.neg_unpriv; break;
  }
}

inline double cross(double ax, double ay, double bx, double by) { return ax * by - ay * bx; }

}  // namespace detail

/// The eight (accuracy, SPD) vertices bounding every labelling of a dataset
/// with the given tallies.
inline OctagonSpec octagon_vertices(const DatasetStats& s) {
  using detail::BlockFlip;
  s.validate();
  // Flip order along the low-SPD side. With the privileged group no larger
  // than the other: drop privileged positives, then flip unprivileged
  // negatives, drop unprivileged positives, flip privileged negatives. A
  // larger privileged group exchanges the roles of the two groups.
  const std::array<BlockFlip, 4> order =
      s.n_priv() <= s.n_unpriv()
          ? std::array{BlockFlip::kDropPrivPositives, BlockFlip::kFlipUnprivNegatives,
                       BlockFlip::kDropUnprivPositives, BlockFlip::kFlipPrivNegatives}
          : std::array{BlockFlip::kFlipUnprivNegatives, BlockFlip::kDropPrivPositives,
                       BlockFlip::kFlipPrivNegatives, BlockFlip::kDropUnprivPositives};

  const LabellingCounts perfect{s.pos_priv, 0, s.pos_unpriv, 0};
  std::array<LabellingCounts, 8> corners;
  corners[0] = perfect;
  LabellingCounts c = perfect;
  for (std::size_t k = 0; k < 4; ++k) {
    detail::apply_flip(s, c, order[k]);
    corners[k + 1] = c;
  }
  // The high-SPD side applies the same flips in reverse order.
  c = perfect;
  for (std::size_t k = 0; k < 3; ++k) {
    detail::apply_flip(s, c, order[3 - k]);
    corners[7 - k] = c;
  }

  OctagonSpec o;
  o.assumption_satisfied = s.positives() >= s.negatives();
  for (std::size_t i = 0; i < 8; ++i) {
    const auto [acc, spd_value] = tradeoff_of(s, corners[i]);
    o.vertices[i] = {acc, spd_value, corners[i]};
  }
  for (std::size_t i = 0; i < 8 && !o.degenerate; ++i) {
    for (std::size_t j = i + 1; j < 8; ++j) {
      if (o.vertices[i].accuracy == o.vertices[j].accuracy && o.vertices[i].spd == o.vertices[j].spd) {
        o.degenerate = true;
        break;
      }
    }
  }

  // Convexity check: all turns share one orientation (collinear allowed).
  int sign = 0;
  for (std::size_t i = 0; i < 8; ++i) {
    const auto& a = o.vertices[i];
    const auto& b = o.vertices[(i + 1) % 8];
    const auto& cc = o.vertices[(i + 2) % 8];
    const double turn = detail::cross(b.accuracy - a.accuracy, b.spd - a.spd,
                                      cc.accuracy - b.accuracy, cc.spd - b.spd);
    if (std::fabs(turn) < 1e-12) continue;
    const int t = turn > 0 ? 1 : -1;
    if (sign == 0) sign = t;
    if (t != sign) throw Error(ErrorCode::kInvalidArgument, "octagon construction is not convex");
  }
  return o;
}

/// Convex-polygon membership with an absolute tolerance on each half-plane
/// (signed distance to the edge line).
inline bool contains(const OctagonSpec& o, const TradeoffPoint& p, double tol = 1e-9) {
  // Distinct vertices in polygon order.
  std::vector<std::pair<double, double>> pts;
  for (const auto& v : o.vertices) {
    if (pts.empty() || pts.back() != std::make_pair(v.accuracy, v.spd)) pts.emplace_back(v.accuracy, v.spd);
  }
  while (pts.size() > 1 && pts.front() == pts.back()) pts.pop_back();

  double area2 = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& a = pts[i];
    const auto& b = pts[(i + 1) % pts.size()];
    area2 += detail::cross(a.first, a.second, b.first, b.second);
  }
  if (pts.size() >= 3 && std::fabs(area2) > 1e-15) {
    const double orient = area2 > 0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto& a = pts[i];
      const auto& b = pts[(i + 1) % pts.size()];
      const double ex = b.first - a.first, ey = b.second - a.second;
      const double len = std::hypot(ex, ey);
      if (len == 0.0) continue;
      const double dist = orient * detail::cross(ex, ey, p.accuracy - a.first, p.spd - a.second) / len;
      if (dist < -tol) return false;
    }
    return true;
  }
  // Degenerate polygon: a segment or a single point. Distance to the nearest
  // segment between distinct vertices.
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& a = pts[i];
    const auto& b = pts[(i + 1) % pts.size()];
    const double ex = b.first - a.first, ey = b.second - a.second;
    const double len2 = ex * ex + ey * ey;
    double t = 0.0;
    if (len2 > 0) t = std::clamp(((p.accuracy - a.first) * ex + (p.spd - a.second) * ey) / len2, 0.0, 1.0);
    best = std::min(best, std::hypot(p.accuracy - (a.first + t * ex), p.spd - (a.second + t * ey)));
  }
  return best <= tol;
}

inline constexpr std::size_t kMaxEnumerationRows = 20;

/// Every distinct (accuracy, SPD) point reachable by some binary labelling of
/// `d`, sorted by (accuracy, spd). Exponential in the row count.
inline std::vector<TradeoffPoint> brute_force_hull(const Dataset& d, const GroupSpec& g) {
  const std::size_t n = d.n_rows();
  if (n > kMaxEnumerationRows) {
    throw Error(ErrorCode::kTooLargeToEnumerate,
                std::to_string(n) + " rows exceed the enumeration bound of " + std::to_string(kMaxEnumerationRows));
  }
  const DatasetStats s = dataset_stats(d, g);
  const GroupFrame frame = resolve_group(d, g);
  const auto y = d.label().codes();
  std::vector<std::pair<double, double>> seen;
  seen.reserve(std::size_t{1} << n);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    LabellingCounts c;
    for (std::size_t r = 0; r < n; ++r) {
      if (!((mask >> r) & 1U)) continue;
      const bool pos = y[r] == frame.favourable_code;
      if (frame.privileged[r]) {
        (pos ? c.tp_priv : c.fp_priv) += 1;
      } else {
        (pos ? c.tp_unpriv : c.fp_unpriv) += 1;
      }
    }
    seen.push_back(tradeoff_of(s, c));
  }
  std::sort(seen.begin(), seen.end());
  seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
  std::vector<TradeoffPoint> out;
  out.reserve(seen.size());
  for (const auto& [acc, spd_value] : seen) out.push_back({"", acc, spd_value});
  return out;
}

struct BaselinePoints {
  TradeoffPoint majority;
  TradeoffPoint perfect;
};

inline BaselinePoints baseline_points(const DatasetStats& s) {
  s.validate();
  BaselinePoints b;
  b.majority = {"Majority",
                static_cast<double>(std::max(s.positives(), s.negatives())) / static_cast<double>(s.n()), 0.0};
  b.perfect = {"Perfect", 1.0, ratio_difference(s.pos_priv, s.n_priv(), s.pos_unpriv, s.n_unpriv())};
  return b;
}

/// True when `a` is at least as accurate and at least as fair as `b` and
/// strictly better on one of the two.
inline bool dominates(const TradeoffPoint& a, const TradeoffPoint& b) {
  const double fa = std::fabs(a.spd), fb = std::fabs(b.spd);
  return a.accuracy >= b.accuracy && fa <= fb && (a.accuracy > b.accuracy || fa < fb);
}

/// Non-dominated points under (maximise accuracy, minimise |SPD|), sorted by
/// decreasing accuracy. Duplicates of a front point are all kept.
inline std::vector<TradeoffPoint> pareto_front(const std::vector<TradeoffPoint>& points) {
  if (points.empty()) throw Error(ErrorCode::kInvalidArgument, "pareto front of an empty set");
  std::vector<TradeoffPoint> front;
  for (const auto& p : points) {
    const bool dominated =
        std::any_of(points.begin(), points.end(), [&](const TradeoffPoint& q) { return dominates(q, p); });
    if (!dominated) front.push_back(p);
  }
  std::stable_sort(front.begin(), front.end(),
                   [](const TradeoffPoint& a, const TradeoffPoint& b) { return a.accuracy > b.accuracy; });
  return front;
}

inline void to_json(nlohmann::json& j, const TradeoffPoint& p) {
  j = nlohmann::json{{"label", p.label}, {"accuracy", p.accuracy}, {"spd", p.spd}};
}

inline void from_json(const nlohmann::json& j, TradeoffPoint& p) {
  j.at("label").get_to(p.label);
  j.at("accuracy").get_to(p.accuracy);
  j.at("spd").get_to(p.spd);
}

inline void to_json(nlohmann::json& j, const DatasetStats& s) {
  j = nlohmann::json{{"pos_priv", s.pos_priv},
                     {"neg_priv", s.neg_priv},
                     {"pos_unpriv", s.pos_unpriv},
                     {"neg_unpriv", s.neg_unpriv},
                     {"n", s.n()}};
}

inline void to_json(nlohmann::json& j, const OctagonSpec& o) {
  j = nlohmann::json::object();
  auto& vs = j["vertices"] = nlohmann::json::array();
  for (const auto& v : o.vertices) vs.push_back({{"accuracy", v.accuracy}, {"spd", v.spd}});
  j["assumption_satisfied"] = o.assumption_satisfied;
  j["degenerate"] = o.degenerate;
}

}  // namespace fairmiss

#endif  // FAIRMISS_OCTAGON_HPP
