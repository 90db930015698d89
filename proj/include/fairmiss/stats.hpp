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

#ifndef FAIRMISS_STATS_HPP
#define FAIRMISS_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "fairmiss/error.hpp"

namespace fairmiss::stats {

inline double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  // Sorted summation keeps the result independent of input order.
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  return std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(xs.size());
}

/// Sample variance (n - 1 denominator); 0 for fewer than two values.
inline double variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  std::vector<double> sq;
  sq.reserve(xs.size());
  for (double x : xs) sq.push_back((x - m) * (x - m));
  std::sort(sq.begin(), sq.end());
  return std::accumulate(sq.begin(), sq.end(), 0.0) / static_cast<double>(xs.size() - 1);
}

inline double stddev(std::span<const double> xs) { return std::sqrt(variance(xs)); }

/// Upper tail P(X >= x) of a chi-square variable with `dof` degrees of freedom.
inline double chi_square_upper_tail(double x, double dof) {
  if (dof <= 0) throw Error(ErrorCode::kInvalidArgument, "chi-square dof must be positive");
  if (x <= 0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, x / 2.0);
}

struct WelchResult {
  double t = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
};

/// Two-sided Welch t-test for a difference of means.
inline WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw Error(ErrorCode::kInsufficientRepetitions, "Welch test needs two samples of size >= 2");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ma = mean(a), mb = mean(b);
  const double va = variance(a) / na, vb = variance(b) / nb;
  WelchResult r;
  const double se2 = va + vb;
  if (se2 <= 0.0) {
    // Both samples constant: the means either coincide or differ with certainty.
    r.t = 0.0;
    r.dof = na + nb - 2.0;
    r.p_value = (ma == mb) ? 1.0 : 0.0;
    return r;
  }
  r.t = (ma - mb) / std::sqrt(se2);
  r.dof = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  boost::math::students_t dist(r.dof);
  r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(r.t)));
  r.p_value = std::clamp(r.p_value, 0.0, 1.0);
  return r;
}

/// Holm step-down adjustment. Returns adjusted p-values in input order.
inline std::vector<double> holm_adjust(std::span<const double> p) {
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return p[i] < p[j]; });
  std::vector<double> adjusted(m);
  double running = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double v = std::min(1.0, static_cast<double>(m - k) * p[order[k]]);
    running = std::max(running, v);
    adjusted[order[k]] = running;
  }
  return adjusted;
}

}  // namespace fairmiss::stats

#endif  // FAIRMISS_STATS_HPP
