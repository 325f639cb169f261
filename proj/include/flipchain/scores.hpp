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

#include <cmath>
#include <limits>

#include "flipchain/plan.hpp"

namespace flipchain {

/// Weighted energy J = w_pop*Jp + w_iso*Ji + w_county*Jc + w_minority*Jm.
/// Lower is better; the sampling distribution is exp(-beta*J)/Z.
struct ScoreWeights {
  double w_pop = 3000.0;
  double w_iso = 2.5;
  double w_county = 0.4;
  double w_minority = 800.0;
  double m_c = 100.0;  // multiplier for counties split three or more ways
  double minority_target_1 = 0.4448;
  double minority_target_2 = 0.3620;
  // Test hook: a constant added to the total. Acceptance probabilities only
  // see score differences, so this must never change chain behavior.
  double constant_offset = 0.0;
};

enum class Compactness { kIsoperimetric, kDispersion };

struct ScoreBreakdown {
  double j_pop = 0;
  double j_iso = 0;
  double j_county = 0;
  double j_minority = 0;
  double j_total = 0;

  static ScoreBreakdown combine(const ScoreWeights& w, double jp, double ji, double jc,
                                double jm) {
    ScoreBreakdown b;
    b.j_pop = jp;
    b.j_iso = ji;
    b.j_county = jc;
    b.j_minority = jm;
    b.j_total = w.w_pop * jp + w.w_iso * ji + w.w_county * jc + w.w_minority * jm +
                w.constant_offset;
    return b;
  }
};

/// sqrt(sum_i (pop(D_i)/pop_ideal - 1)^2)
inline double population_score(const PlanState& state) {
  double ideal = state.graph().total_population() / state.num_districts();
  if (!(ideal > 0)) throw PreconditionError("total population must be positive");
  double sum = 0;
  for (int d = 1; d <= state.num_districts(); ++d) {
    double t = state.aggregate(d).population / ideal - 1.0;
    sum += t * t;
  }
  return std::sqrt(sum);
}

/// sum_i boundary(dD_i)^2 / area(D_i); 4*pi per district is the ideal.
inline double isoperimetric_score(const PlanState& state) {
  double sum = 0;
  for (int d = 1; d <= state.num_districts(); ++d) {
    const auto& a = state.aggregate(d);
    if (!(a.area > 0))
      throw PreconditionError("district " + std::to_string(d) + " has non-positive area");
    sum += a.boundary_length * a.boundary_length / a.area;
  }
  return sum;
}

/// Two-way splits weighted by sqrt(second-largest fraction), three-or-more
/// splits by m_c times sqrt(fraction outside the two largest pieces). A
/// county split three ways counts only in the m_c term.
inline double county_score(const PlanState& state, double m_c) {
  return state.split2_count() * state.split2_w_sum() +
         m_c * state.split3_count() * state.split3_w_sum();
}

/// Hinge penalty on the two most-minority districts: sqrt(H(t1-m1)) +
/// sqrt(H(t2-m2)) where m1 >= m2 are the top minority fractions of total
/// district population.
inline double minority_score(const PlanState& state, const ScoreWeights& w) {
  if (state.num_districts() < 2)
    throw PreconditionError("minority score needs at least two districts");
  double m1 = 0, m2 = 0;
  for (int d = 1; d <= state.num_districts(); ++d) {
    const auto& a = state.aggregate(d);
    double frac = a.population > 0 ? a.minority_population / a.population : 0.0;
    if (frac > m1) {
      m2 = m1;
      m1 = frac;
    } else if (frac > m2) {
      m2 = frac;
    }
  }
  double h1 = std::max(0.0, w.minority_target_1 - m1);
  double h2 = std::max(0.0, w.minority_target_2 - m2);
  return std::sqrt(h1) + std::sqrt(h2);
}

/// sum_i area(minimal axis-aligned rectangle containing D_i) / area(D_i).
inline double dispersion_score(const PlanState& state) {
  double sum = 0;
  for (int d = 1; d <= state.num_districts(); ++d) {
    const auto& a = state.aggregate(d);
    if (!(a.area > 0))
      throw PreconditionError("district " + std::to_string(d) + " has non-positive area");
    BoundingBox bb =
        state.tracking_bboxes() ? state.district_bbox(d) : state.compute_district_bbox(d);
    sum += bb.area() / a.area;
  }
  return sum;
}

inline double compactness_score(const PlanState& state, Compactness kind) {
  return kind == Compactness::kIsoperimetric ? isoperimetric_score(state)
                                             : dispersion_score(state);
}

enum class ContiguityCheck { kSkip, kEnforce };

/// Full weighted score. With ContiguityCheck::kEnforce a state with any
/// disconnected district gets j_total = +infinity (the rejection sentinel);
/// the component fields still carry their finite values.
inline ScoreBreakdown total_score(const PlanState& state, const ScoreWeights& w,
                                  Compactness kind = Compactness::kIsoperimetric,
                                  ContiguityCheck check = ContiguityCheck::kSkip) {
  ScoreBreakdown b = ScoreBreakdown::combine(w, population_score(state),
                                             compactness_score(state, kind),
                                             county_score(state, w.m_c),
                                             minority_score(state, w));
  if (check == ContiguityCheck::kEnforce) {
    for (int d = 1; d <= state.num_districts(); ++d) {
      if (!state.is_contiguous(d)) {
        b.j_total = std::numeric_limits<double>::infinity();
        break;
      }
    }
  }
  return b;
}

/// J(after flip) - J(before flip), leaving the state unchanged (the flip is
/// applied to the state's caches and reverted bit-exactly). Cost is
/// O(degree + D). Throws like apply_flip when the donor would be emptied.
inline double score_delta(PlanState& state, int32_t vtd, int32_t new_label,
                          const ScoreWeights& w,
                          Compactness kind = Compactness::kIsoperimetric) {
  double before = total_score(state, w, kind).j_total;
  FlipDelta delta;
  state.apply_flip(vtd, new_label, delta);
  double after = total_score(state, w, kind).j_total;
  state.revert(delta);
  return after - before;
}

}  // namespace flipchain
