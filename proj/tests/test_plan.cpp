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

#include <gtest/gtest.h>

#include <sstream>

#include "flipchain/plan.hpp"
#include "flipchain/synth.hpp"
#include "testutil.hpp"

using namespace flipchain;
using testutil::unit_grid;

namespace {

Plan grid_plan(const DistrictGraph& g, int districts, const std::vector<int>& labels) {
  Plan p{districts, {}};
  p.assignment.assign(labels.begin(), labels.end());
  EXPECT_EQ(static_cast<int32_t>(p.assignment.size()), g.size());
  return p;
}

TEST(PlanState, ConflictedEdgesLeftRightSplit) {
  auto g = unit_grid(2, 2);
  // columns: r0c0,r0c1 / r1c0,r1c1 -> left column district 1, right district 2
  PlanState state(g, grid_plan(g, 2, {1, 2, 1, 2}));
  EXPECT_EQ(state.conflicted_count(), 2);
  EXPECT_EQ(state.aggregate(1).vtd_count, 2);
  EXPECT_DOUBLE_EQ(state.aggregate(1).boundary_length, 4 + 2);  // outer 4 + 2 cut edges
}

TEST(PlanState, SingleDistrictHasNoConflicts) {
  auto g = unit_grid(2, 2);
  PlanState state(g, grid_plan(g, 1, {1, 1, 1, 1}));
  EXPECT_EQ(state.conflicted_count(), 0);
}

TEST(PlanState, MissingAndBadLabelsRejected) {
  auto g = unit_grid(2, 2);
  EXPECT_THROW(PlanState(g, grid_plan(g, 2, {1, 2, 1, 0})), PreconditionError);
  EXPECT_THROW(PlanState(g, grid_plan(g, 2, {1, 2, 1, 3})), PreconditionError);
  EXPECT_THROW(PlanState(g, grid_plan(g, 3, {1, 2, 1, 2})), PreconditionError);  // empty 3
  std::istringstream missing("id,district\nr0c0,1\nr0c1,2\nr1c0,1\n");
  try {
    load_plan_csv(missing, g);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("UnlabeledVtd"), std::string::npos);
  }
}

TEST(PlanState, PlanCsvRoundTrip) {
  auto g = unit_grid(3, 3);
  Plan p = grid_plan(g, 3, {1, 1, 2, 1, 3, 2, 3, 3, 2});
  std::ostringstream out;
  write_plan_csv(out, g, p);
  std::istringstream in(out.str());
  Plan q = load_plan_csv(in, g);
  EXPECT_EQ(p, q);
  std::ostringstream out2;
  write_plan_csv(out2, g, q);
  EXPECT_EQ(out.str(), out2.str());
}

TEST(PlanState, ContiguityClassics) {
  auto g3 = unit_grid(3, 3);
  // left column of a 3x3 grid
  PlanState cols(g3, grid_plan(g3, 2, {1, 2, 2, 1, 2, 2, 1, 2, 2}));
  EXPECT_TRUE(cols.is_contiguous(1));
  EXPECT_TRUE(cols.is_contiguous(2));
  // two opposite corners as one district: not contiguous
  PlanState corners(g3, grid_plan(g3, 2, {1, 2, 2, 2, 2, 2, 2, 2, 1}));
  EXPECT_FALSE(corners.is_contiguous(1));
  EXPECT_TRUE(corners.is_contiguous(2));
  // ring of the 8 boundary cells, center excluded
  PlanState ring(g3, grid_plan(g3, 2, {1, 1, 1, 1, 2, 1, 1, 1, 1}));
  EXPECT_TRUE(ring.is_contiguous(1));
  EXPECT_TRUE(ring.is_contiguous(2));
}

TEST(PlanState, ContiguityAgreesWithUnionFindOracle) {
  auto g = unit_grid(4, 4);
  SplitMix64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    Plan p = trial % 2 == 0 ? testutil::random_valid_plan(g, 3, rng)
                            : testutil::random_labeling(g, 3, rng);
    PlanState state(g, p);
    for (int d = 1; d <= 3; ++d) {
      EXPECT_EQ(state.is_contiguous(d), testutil::district_connected_oracle(g, p, d))
          << "trial " << trial << " district " << d;
    }
  }
}

TEST(PlanState, FlipRevertBitIdentical) {
  auto g = unit_grid(3, 3);
  PlanState state(g, grid_plan(g, 2, {1, 1, 2, 1, 1, 2, 1, 2, 2}));
  PlanState before = state;
  FlipDelta delta = state.apply_flip(g.index_of("r0c1"), 2);
  EXPECT_FALSE(state.identical(before));
  state.revert(delta);
  EXPECT_TRUE(state.identical(before));
}

TEST(PlanState, FlipRevertStackRestoresExactly) {
  SynthSpec spec;
  spec.rows = 6;
  spec.cols = 6;
  spec.pop_model = PopulationModel::kUrbanCluster;
  spec.county_block = 2;
  spec.minority_cluster_fraction = 0.3;
  spec.seed = 7;
  auto grid = make_grid_state(spec);
  SplitMix64 rng(99);
  PlanState state(grid.graph, testutil::random_valid_plan(grid.graph, 3, rng));
  state.enable_bbox_tracking();
  PlanState before = state;
  std::vector<FlipDelta> deltas;
  for (int k = 0; k < 40; ++k) {
    int32_t v, to;
    if (!testutil::random_valid_flip(state, rng, &v, &to)) break;
    deltas.push_back(state.apply_flip(v, to));
  }
  ASSERT_GT(deltas.size(), 10u);
  for (auto it = deltas.rbegin(); it != deltas.rend(); ++it) state.revert(*it);
  EXPECT_TRUE(state.identical(before));
}

TEST(PlanState, InteriorFlipAddsDegreeConflicts) {
  auto g = unit_grid(3, 3);
  // all district 1 except one corner in 2; center cell is interior to 1
  PlanState state(g, grid_plan(g, 2, {2, 1, 1, 1, 1, 1, 1, 1, 1}));
  int32_t center = g.index_of("r1c1");
  int before = state.conflicted_count();
  state.apply_flip(center, 2);
  EXPECT_EQ(state.conflicted_count(), before + 4);  // degree of the center
}

TEST(PlanState, FlipPreconditionErrors) {
  auto g = unit_grid(2, 2);
  PlanState state(g, grid_plan(g, 2, {1, 2, 2, 2}));
  try {
    state.apply_flip(g.index_of("r0c0"), 2);
    FAIL() << "expected EmptiesDistrict";
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("EmptiesDistrict"), std::string::npos);
  }
  EXPECT_THROW(state.apply_flip(g.index_of("r0c1"), 2), PreconditionError);  // same label
  EXPECT_THROW(state.apply_flip(g.index_of("r0c1"), 5), PreconditionError);  // out of range
}

TEST(PlanState, MaxDistrictDeviation) {
  auto g = unit_grid(3, 3);
  Plan ref = grid_plan(g, 3, {1, 1, 1, 2, 2, 2, 3, 3, 3});
  PlanState state(g, ref);
  EXPECT_EQ(state.max_district_deviation(ref), 0);

  Plan moved = ref;
  moved.assignment[g.index_of("r0c2")] = 2;  // one cell 1 -> 2
  EXPECT_EQ(PlanState(g, moved).max_district_deviation(ref), 1);

  Plan swapped = ref;
  swapped.assignment[g.index_of("r0c2")] = 2;
  swapped.assignment[g.index_of("r1c0")] = 1;
  EXPECT_EQ(PlanState(g, swapped).max_district_deviation(ref), 2);
}

TEST(PlanState, DeviationTrackingMatchesRecomputation) {
  auto g = unit_grid(5, 5);
  SplitMix64 rng(5);
  Plan ref = testutil::random_valid_plan(g, 3, rng);
  PlanState state(g, ref);
  state.set_reference(ref);
  for (int k = 0; k < 500; ++k) {
    int32_t v, to;
    if (!testutil::random_valid_flip(state, rng, &v, &to)) break;
    int32_t predicted = state.deviation_after_flip(v, to);
    state.apply_flip(v, to);
    EXPECT_EQ(state.max_deviation_now(), predicted);
    EXPECT_EQ(state.max_deviation_now(), state.max_district_deviation(ref));
  }
}

TEST(PlanState, IncrementalCachesSurviveLongRandomWalk) {
  SynthSpec spec;
  spec.rows = 8;
  spec.cols = 8;
  spec.pop_model = PopulationModel::kUrbanCluster;
  spec.urban_peak = 5;
  spec.county_block = 3;
  spec.minority_cluster_fraction = 0.4;
  spec.seed = 11;
  auto grid = make_grid_state(spec);
  SplitMix64 rng(17);
  PlanState state(grid.graph, testutil::random_valid_plan(grid.graph, 4, rng));
  state.enable_bbox_tracking();
  FlipDelta delta;
  int applied = 0;
  for (int k = 0; k < 100000; ++k) {
    int32_t v, to;
    if (!testutil::random_valid_flip(state, rng, &v, &to)) break;
    state.apply_flip(v, to, delta);
    ++applied;
    if (rng.next_below(4) == 0) state.revert(delta);  // exercise undo paths
    if (k % 10000 == 0) state.check_consistency();
  }
  ASSERT_GT(applied, 50000);
  state.check_consistency();
  for (int d = 1; d <= 4; ++d) {
    EXPECT_EQ(state.district_bbox(d), state.compute_district_bbox(d));
  }
}

TEST(PlanState, AdditiveAttributesSumToGraphTotals) {
  auto g = unit_grid(4, 4);
  SplitMix64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    PlanState state(g, testutil::random_labeling(g, 4, rng));
    double pop = 0, area = 0, minority = 0;
    for (int d = 1; d <= 4; ++d) {
      pop += state.aggregate(d).population;
      area += state.aggregate(d).area;
      minority += state.aggregate(d).minority_population;
    }
    EXPECT_DOUBLE_EQ(pop, g.total_population());
    EXPECT_DOUBLE_EQ(area, g.total_area());
    EXPECT_DOUBLE_EQ(minority, 0.0);
  }
}

TEST(PlanState, CanonicalPartitionKeyIgnoresLabelNames) {
  auto g = unit_grid(2, 2);
  Plan a = grid_plan(g, 2, {1, 2, 1, 2});
  Plan b = grid_plan(g, 2, {2, 1, 2, 1});
  EXPECT_EQ(canonical_partition_key(a), canonical_partition_key(b));
  Plan c = grid_plan(g, 2, {1, 1, 2, 2});
  EXPECT_NE(canonical_partition_key(a), canonical_partition_key(c));
}

}  // namespace
