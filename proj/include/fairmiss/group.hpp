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

#ifndef FAIRMISS_GROUP_HPP
#define FAIRMISS_GROUP_HPP

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairmiss/dataset.hpp"
#include "fairmiss/error.hpp"

namespace fairmiss {

/// The fairness frame: which attribute splits the population, which of its
/// values count as privileged, and which label value is the favourable one.
struct GroupSpec {
  std::string protected_attribute;
  std::vector<std::string> privileged_values;
  std::string favourable_class;

  /// Same frame with the privileged set replaced by its complement.
  GroupSpec swapped_groups(const Dataset& d) const {
    const Column& attr = d.column(protected_attribute);
    GroupSpec out = *this;
    out.privileged_values.clear();
    for (const auto& level : attr.levels()) {
      if (std::find(privileged_values.begin(), privileged_values.end(), level) ==
          privileged_values.end()) {
        out.privileged_values.push_back(level);
      }
    }
    return out;
  }

  friend bool operator==(const GroupSpec&, const GroupSpec&) = default;
};

inline void to_json(nlohmann::json& j, const GroupSpec& g) {
  j = nlohmann::json{{"protected_attribute", g.protected_attribute},
                     {"privileged_values", g.privileged_values},
                     {"favourable_class", g.favourable_class}};
}

inline void from_json(const nlohmann::json& j, GroupSpec& g) {
  try {
    j.at("protected_attribute").get_to(g.protected_attribute);
    j.at("privileged_values").get_to(g.privileged_values);
    j.at("favourable_class").get_to(g.favourable_class);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidGroup, std::string("malformed group spec: ") + e.what());
  }
}

/// A GroupSpec resolved against one dataset: per-row privileged flags and the
/// code of the favourable class in the label column.
struct GroupFrame {
  std::vector<std::uint8_t> privileged;
  std::int32_t favourable_code = 0;
};

/// Validates `g` against `d` and resolves it. The protected attribute must be
/// a fully observed categorical column; the privileged values must form a
/// strict nonempty subset of its categories.
inline GroupFrame resolve_group(const Dataset& d, const GroupSpec& g) {
  const auto idx = d.index_of(g.protected_attribute);
  if (!idx) {
    throw Error(ErrorCode::kInvalidGroup, "protected attribute '" + g.protected_attribute +
                                              "' is not a column");
  }
  const Column& attr = d.column(*idx);
  if (!attr.is_categorical()) {
    throw Error(ErrorCode::kInvalidGroup,
                "protected attribute '" + g.protected_attribute + "' must be categorical");
  }
  if (attr.has_missing()) {
    throw Error(ErrorCode::kInvalidGroup,
                "protected attribute '" + g.protected_attribute + "' has missing values");
  }
  if (g.privileged_values.empty()) {
    throw Error(ErrorCode::kInvalidGroup, "privileged value set is empty");
  }
  std::vector<std::uint8_t> is_priv_level(attr.levels().size(), 0);
  for (const auto& v : g.privileged_values) {
    const auto code = attr.level_code(v);
    if (!code) {
      throw Error(ErrorCode::kInvalidGroup, "privileged value '" + v + "' is not a category of '" +
                                                g.protected_attribute + "'");
    }
    is_priv_level[*code] = 1;
  }
  if (std::all_of(is_priv_level.begin(), is_priv_level.end(), [](auto f) { return f != 0; })) {
    throw Error(ErrorCode::kEmptyGroup, "privileged values cover every category of '" +
                                              g.protected_attribute + "'");
  }
  if (!d.has_label()) throw Error(ErrorCode::kMissingLabel, "group audits need a label column");
  const auto fav = d.label().level_code(g.favourable_class);
  if (!fav) {
    throw Error(ErrorCode::kInvalidGroup,
                "favourable class '" + g.favourable_class + "' is not a label value");
  }
  GroupFrame frame;
  frame.favourable_code = *fav;
  frame.privileged.resize(d.n_rows());
  for (std::size_t r = 0; r < d.n_rows(); ++r) frame.privileged[r] = is_priv_level[attr.code(r)];
  return frame;
}

}  // namespace fairmiss

#endif  // FAIRMISS_GROUP_HPP
