/* Copyright 2026 The flipchain Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "flipchain/election.hpp"
#include "flipchain/errors.hpp"

namespace flipchain {

/// Compensated accumulator; keeps parallel/serial reductions in agreement
/// well below 1e-12.
struct KahanSum {
  double sum = 0, c = 0;
  void add(double x) {
    double y = x - c;
    double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

struct RankStats {
  double mean = 0, median = 0, q1 = 0, q3 = 0;
  double lo = 0, hi = 0;  // whiskers: 1.5*IQR rule capped at observed extremes
};

struct EnsembleStats {
  std::vector<RankStats> per_rank;          // index 0 = most Republican rank
  std::map<int, long> seat_histogram;       // integer Democratic seats -> count
  std::vector<double> interpolated;         // interpolated seat value per sample
  double interpolated_mean = 0;

  std::vector<double> rank_means() const {
    std::vector<double> m;
    m.reserve(per_rank.size());
    for (const auto& r : per_rank) m.push_back(r.mean);
    return m;
  }
};

namespace detail {
// Linear-interpolation quantile (the common "type 7" rule) on sorted data.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw PreconditionError("quantile of empty data");
  double pos = p * (sorted.size() - 1);
  size_t lo = static_cast<size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  double frac = pos - lo;
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}
}  // namespace detail

/// Marginal statistics of each rank position over an ensemble of ranked
/// share vectors, plus the seat and interpolated-seat distributions.
inline EnsembleStats rank_marginal_stats(const std::vector<std::vector<double>>& ranked) {
  if (ranked.empty()) throw PreconditionError("empty ensemble");
  size_t d = ranked[0].size();
  for (const auto& v : ranked) {
    if (v.size() != d) throw PreconditionError("ranked vectors differ in length");
  }
  EnsembleStats stats;
  stats.per_rank.resize(d);
  std::vector<double> column(ranked.size());
  for (size_t r = 0; r < d; ++r) {
    KahanSum sum;
    for (size_t i = 0; i < ranked.size(); ++i) {
      column[i] = ranked[i][r];
      sum.add(column[i]);
    }
    std::sort(column.begin(), column.end());
    RankStats& rs = stats.per_rank[r];
    rs.mean = sum.value() / ranked.size();
    rs.median = detail::quantile_sorted(column, 0.5);
    rs.q1 = detail::quantile_sorted(column, 0.25);
    rs.q3 = detail::quantile_sorted(column, 0.75);
    double iqr = rs.q3 - rs.q1;
    rs.hi = std::min(column.back(), rs.q3 + 1.5 * iqr);
    rs.lo = std::max(column.front(), rs.q1 - 1.5 * iqr);
  }
  KahanSum interp_sum;
  for (const auto& v : ranked) {
    stats.seat_histogram[seat_count_from_shares(v)]++;
    double iv = interpolated_seats_from_shares(v);
    stats.interpolated.push_back(iv);
    interp_sum.add(iv);
  }
  stats.interpolated_mean = interp_sum.value() / ranked.size();
  return stats;
}

/// Euclidean distance between a plan's ranked share vector and the
/// ensemble's per-rank means.
inline double gerrymandering_index(std::span<const double> ranked,
                                   std::span<const double> rank_means) {
  if (ranked.size() != rank_means.size())
    throw PreconditionError("ranked vector and rank means differ in length");
  double sum = 0;
  for (size_t i = 0; i < ranked.size(); ++i) {
    double t = rank_means[i] - ranked[i];
    sum += t * t;
  }
  return std::sqrt(sum);
}

/// |interpolated seat value - ensemble mean interpolated value|.
inline double representativeness_index(double value, double ensemble_mean) {
  return std::abs(value - ensemble_mean);
}

/// Share-based efficiency gap. Per district with Democratic share s: the
/// losing party wastes its whole share, the winner wastes its margin above
/// one half. Positive values mean Democrats wasted more. Equivalent to the
/// vote-count form when district totals are equal.
inline double efficiency_gap(const std::vector<DistrictResult>& results) {
  if (results.empty()) throw PreconditionError("efficiency gap of zero districts");
  double dem_waste = 0, rep_waste = 0;
  for (const auto& r : results) {
    double s = r.dem_share;
    if (r.dem_win) {
      dem_waste += s - 0.5;
      rep_waste += 1.0 - s;
    } else {
      dem_waste += s;
      rep_waste += (1.0 - s) - 0.5;
    }
  }
  return (dem_waste - rep_waste) / results.size();
}

/// Vote-count variant (sensitivity checks): wasted votes over total votes.
inline double efficiency_gap_votes(const std::vector<DistrictResult>& results) {
  if (results.empty()) throw PreconditionError("efficiency gap of zero districts");
  double dem_waste = 0, rep_waste = 0, total = 0;
  for (const auto& r : results) {
    double t = r.dem_votes + r.rep_votes;
    total += t;
    if (r.dem_win) {
      dem_waste += r.dem_votes - t / 2;
      rep_waste += r.rep_votes;
    } else {
      dem_waste += r.dem_votes;
      rep_waste += r.rep_votes - t / 2;
    }
  }
  return (dem_waste - rep_waste) / total;
}

/// Distinct values ascending with the fraction of the data strictly greater.
inline std::vector<std::pair<double, double>> complementary_cdf(std::vector<double> values) {
  if (values.empty()) throw PreconditionError("complementary cdf of empty data");
  std::sort(values.begin(), values.end());
  std::vector<std::pair<double, double>> out;
  size_t n = values.size();
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j < n && values[j] == values[i]) ++j;
    out.emplace_back(values[i], static_cast<double>(n - j) / n);
    i = j;
  }
  return out;
}

/// Fraction of the ensemble strictly greater than value.
inline double quantile_of(double value, std::span<const double> ensemble) {
  if (ensemble.empty()) throw PreconditionError("quantile over empty ensemble");
  size_t greater = 0;
  for (double v : ensemble) greater += v > value ? 1 : 0;
  return static_cast<double>(greater) / ensemble.size();
}

inline double pearson_correlation(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw PreconditionError("correlation inputs differ in length");
  if (xs.size() < 2) throw PreconditionError("correlation needs at least two points");
  KahanSum sx, sy;
  for (size_t i = 0; i < xs.size(); ++i) {
    sx.add(xs[i]);
    sy.add(ys[i]);
  }
  double mx = sx.value() / xs.size();
  double my = sy.value() / ys.size();
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    double dx = xs[i] - mx;
    double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0) || !(syy > 0)) throw PreconditionError("correlation with zero variance");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace flipchain
