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
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "flipchain/election.hpp"
#include "flipchain/rng.hpp"
#include "flipchain/scores.hpp"

namespace flipchain {

enum class PopulationModel { kUniform, kUrbanCluster };

/// Desk-scale synthetic state: a rows x cols grid of unit cells (area 1,
/// shared borders 1, exterior sides on the rim). The urban-cluster model
/// bumps population, Democratic share and minority fraction around a center
/// with Gaussian falloff. All fields are deterministic in the spec.
struct SynthSpec {
  int rows = 10;
  int cols = 10;
  int num_districts = 4;
  PopulationModel pop_model = PopulationModel::kUniform;
  double base_population = 100.0;
  double urban_center_row = -1.0;  // < 0: grid center
  double urban_center_col = -1.0;
  double urban_peak = 6.0;    // population multiplier at the center
  double urban_radius = 0.0;  // Gaussian sigma in cells; 0: min(rows,cols)/5
  double statewide_dem_share = 0.5;
  double urban_dem_boost = 0.0;  // added to the share at the center
  int county_block = 3;          // county tiling block edge, in cells
  double minority_cluster_fraction = 0.0;
  uint64_t seed = 0;
};

struct GridState {
  DistrictGraph graph;
  VoteTable votes;
};

inline std::string grid_cell_id(int r, int c) {
  return "r" + std::to_string(r) + "c" + std::to_string(c);
}

inline GridState make_grid_state(const SynthSpec& spec) {
  if (spec.rows < 1 || spec.cols < 1) throw InputError("grid must be at least 1x1");
  if (spec.rows * spec.cols < spec.num_districts)
    throw InputError("fewer cells than districts");
  if (spec.county_block < 1) throw InputError("county_block must be >= 1");

  double cr = spec.urban_center_row >= 0 ? spec.urban_center_row : (spec.rows - 1) / 2.0;
  double cc = spec.urban_center_col >= 0 ? spec.urban_center_col : (spec.cols - 1) / 2.0;
  double sigma = spec.urban_radius > 0 ? spec.urban_radius
                                       : std::max(1.0, std::min(spec.rows, spec.cols) / 5.0);
  auto urban_weight = [&](int r, int c) {
    double d2 = (r - cr) * (r - cr) + (c - cc) * (c - cc);
    return std::exp(-d2 / (2.0 * sigma * sigma));
  };

  SplitMix64 rng(spec.seed);
  int n = spec.rows * spec.cols;
  std::vector<double> pop(n), weight(n);
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      int i = r * spec.cols + c;
      weight[i] = urban_weight(r, c);
      if (spec.pop_model == PopulationModel::kUniform) {
        pop[i] = spec.base_population;
        rng.next_u64();  // keep the stream aligned across models
      } else {
        // small deterministic jitter so desk fixtures have no exact ties
        double jitter = 1.0 + 0.04 * (rng.next_double() - 0.5);
        pop[i] = std::round(spec.base_population *
                            (1.0 + (spec.urban_peak - 1.0) * weight[i]) * jitter);
      }
    }
  }

  // Democratic share: base plus urban boost, then a uniform shift chosen so
  // the statewide two-party share hits the requested value.
  std::vector<double> share(n);
  auto clamp_share = [](double s) { return std::min(0.98, std::max(0.02, s)); };
  double shift = 0.0;
  if (spec.urban_dem_boost != 0.0) {
    double want = spec.statewide_dem_share;
    double lo = -1.0, hi = 1.0;
    for (int it = 0; it < 80; ++it) {
      double mid = (lo + hi) / 2;
      double dem = 0, tot = 0;
      for (int i = 0; i < n; ++i) {
        dem += pop[i] * clamp_share(spec.statewide_dem_share +
                                    spec.urban_dem_boost * weight[i] + mid);
        tot += pop[i];
      }
      (dem / tot > want ? hi : lo) = mid;
    }
    shift = (lo + hi) / 2;
  }
  for (int i = 0; i < n; ++i) {
    share[i] = spec.urban_dem_boost == 0.0
                   ? spec.statewide_dem_share
                   : clamp_share(spec.statewide_dem_share + spec.urban_dem_boost * weight[i] +
                                 shift);
  }

  std::vector<Vtd> units;
  units.reserve(n);
  std::vector<Adjacency> adjacencies;
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      int i = r * spec.cols + c;
      Vtd u;
      u.id = grid_cell_id(r, c);
      u.population = pop[i];
      u.area = 1.0;
      u.minority_population =
          std::round(pop[i] * spec.minority_cluster_fraction * weight[i]);
      u.county = "cty" + std::to_string(r / spec.county_block) + "_" +
                 std::to_string(c / spec.county_block);
      u.outer_boundary_length = (r == 0) + (r == spec.rows - 1) + (c == 0) +
                                (c == spec.cols - 1);
      u.bbox = BoundingBox{static_cast<double>(c), static_cast<double>(r),
                           static_cast<double>(c + 1), static_cast<double>(r + 1)};
      units.push_back(std::move(u));
      if (c + 1 < spec.cols) adjacencies.push_back({grid_cell_id(r, c), grid_cell_id(r, c + 1), 1.0});
      if (r + 1 < spec.rows) adjacencies.push_back({grid_cell_id(r, c), grid_cell_id(r + 1, c), 1.0});
    }
  }

  VoteTable votes;
  votes.election = "synthetic";
  votes.dem.resize(n);
  votes.rep.resize(n);
  for (int i = 0; i < n; ++i) {
    votes.dem[i] = std::round(pop[i] * share[i]);
    votes.rep[i] = pop[i] - votes.dem[i];
  }

  return GridState{DistrictGraph(std::move(units), std::move(adjacencies)), std::move(votes)};
}

/// Striped starting plan: contiguous bands of rows balanced by population.
/// Handy as a neutral, always-valid initial state for grid fixtures.
inline Plan banded_plan(const DistrictGraph& g, const SynthSpec& spec) {
  int n = spec.rows * spec.cols;
  if (g.size() != n) throw PreconditionError("graph does not match the grid spec");
  Plan plan;
  plan.num_districts = spec.num_districts;
  plan.assignment.assign(n, 0);
  double total = g.total_population();
  double per = total / spec.num_districts;
  int d = 1;
  double acc = 0;
  for (int r = 0; r < spec.rows; ++r) {
    double row_pop = 0;
    for (int c = 0; c < spec.cols; ++c) row_pop += g.unit(r * spec.cols + c).population;
    // advance to the next band on the boundary nearest the even split,
    // always leaving enough rows for the remaining districts
    if (d < spec.num_districts && acc + row_pop / 2 >= per * d &&
        spec.rows - r >= spec.num_districts - d) {
      ++d;
    }
    for (int c = 0; c < spec.cols; ++c) plan.assignment[r * spec.cols + c] = d;
    acc += row_pop;
  }
  return plan;
}

namespace detail {

// Enumerates every connected subset of `avail` that contains `v0`, by
// frontier expansion with an exclusion mask so each subset appears once.
template <typename Emit>
void connected_subsets(const std::vector<uint32_t>& nbr, uint32_t avail, int v0, Emit&& emit) {
  struct Frame {
    uint32_t set, frontier, banned;
  };
  std::vector<Frame> stack;
  stack.push_back({1u << v0, nbr[v0] & avail & ~(1u << v0), 0u});
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    emit(f.set);
    uint32_t rest = f.frontier;
    uint32_t banned = f.banned;
    while (rest) {
      uint32_t bit = rest & (~rest + 1);
      rest ^= bit;
      int v = std::countr_zero(bit);
      uint32_t nf = (rest | (nbr[v] & avail & ~banned)) & ~(f.set | bit);
      stack.push_back({f.set | bit, nf, banned});
      banned |= bit;
    }
  }
}

inline bool mask_connected(const std::vector<uint32_t>& nbr, uint32_t mask) {
  if (mask == 0) return false;
  uint32_t start = mask & (~mask + 1);
  uint32_t seen = start;
  uint32_t frontier = start;
  while (frontier) {
    uint32_t next = 0;
    uint32_t f = frontier;
    while (f) {
      uint32_t bit = f & (~f + 1);
      f ^= bit;
      next |= nbr[std::countr_zero(bit)] & mask & ~seen;
    }
    seen |= next;
    frontier = next;
  }
  return seen == mask;
}

}  // namespace detail

/// Every partition of the vertices into `num_districts` nonempty connected
/// parts, each exactly once: the part containing the smallest vertex gets
/// label 1, the part containing the smallest remaining vertex label 2, and
/// so on. Only feasible on tiny graphs; guarded at 20 vertices. The optional
/// balance filter keeps plans whose districts are all within
/// `max_pop_deviation` of the ideal population.
inline std::vector<Plan> enumerate_connected_plans(
    const DistrictGraph& g, int num_districts,
    std::optional<double> max_pop_deviation = std::nullopt) {
  int n = g.size();
  if (n > 20) throw PreconditionError("enumeration guard: graph has more than 20 vertices");
  if (num_districts < 1) throw PreconditionError("need at least one district");

  std::vector<uint32_t> nbr(n, 0);
  for (const auto& e : g.edges()) {
    nbr[e.a] |= 1u << e.b;
    nbr[e.b] |= 1u << e.a;
  }
  std::vector<double> pop(n);
  for (int v = 0; v < n; ++v) pop[v] = g.unit(v).population;
  double ideal = g.total_population() / num_districts;
  auto part_balanced = [&](uint32_t mask) {
    if (!max_pop_deviation) return true;
    double p = 0;
    for (uint32_t m = mask; m; m &= m - 1) p += pop[std::countr_zero(m)];
    return std::abs(p / ideal - 1.0) <= *max_pop_deviation + 1e-12;
  };

  uint32_t all = n == 32 ? ~0u : (1u << n) - 1;
  std::vector<Plan> plans;
  std::vector<int32_t> labels(n, 0);

  // Assign parts in label order; each part is a connected subset containing
  // the smallest still-unassigned vertex, which makes the labeling canonical.
  auto rec = [&](auto&& self, uint32_t remaining, int label) -> void {
    int v0 = std::countr_zero(remaining);
    if (label == num_districts) {
      if (!detail::mask_connected(nbr, remaining) || !part_balanced(remaining)) return;
      for (uint32_t m = remaining; m; m &= m - 1) labels[std::countr_zero(m)] = label;
      plans.push_back(Plan{num_districts, labels});
      return;
    }
    int needed_after = num_districts - label;  // parts still to place
    detail::connected_subsets(nbr, remaining, v0, [&](uint32_t set) {
      uint32_t rest = remaining & ~set;
      if (std::popcount(rest) < needed_after) return;
      if (!part_balanced(set)) return;
      for (uint32_t m = set; m; m &= m - 1) labels[std::countr_zero(m)] = label;
      self(self, rest, label + 1);
    });
  };
  if (num_districts == 1) {
    if (detail::mask_connected(nbr, all) && part_balanced(all)) {
      std::fill(labels.begin(), labels.end(), 1);
      plans.push_back(Plan{1, labels});
    }
  } else {
    rec(rec, all, 1);
  }

  std::sort(plans.begin(), plans.end(),
            [](const Plan& a, const Plan& b) { return a.assignment < b.assignment; });
  return plans;
}

/// The exact Gibbs distribution exp(-beta*J)/Z over the enumerated plans.
/// Probabilities are computed with the max-shift trick so large beta stays
/// finite; z may underflow for very negative log_z, log_z never does.
struct ExactDistribution {
  std::vector<Plan> plans;
  std::vector<double> score;        // J per plan
  std::vector<double> probability;  // sums to 1
  double beta = 0;
  double log_z = 0;
  double z = 0;
};

inline ExactDistribution exact_distribution(
    const DistrictGraph& g, int num_districts, const ScoreWeights& w, double beta,
    Compactness kind = Compactness::kIsoperimetric,
    std::optional<double> max_pop_deviation = std::nullopt) {
  ExactDistribution dist;
  dist.beta = beta;
  dist.plans = enumerate_connected_plans(g, num_districts, max_pop_deviation);
  if (dist.plans.empty()) throw Error("no connected plans to enumerate");
  dist.score.reserve(dist.plans.size());
  for (const auto& p : dist.plans) {
    PlanState state(g, p);
    dist.score.push_back(total_score(state, w, kind).j_total);
  }
  double jmin = *std::min_element(dist.score.begin(), dist.score.end());
  double sum = 0;
  dist.probability.resize(dist.score.size());
  for (size_t i = 0; i < dist.score.size(); ++i) {
    dist.probability[i] = std::exp(-beta * (dist.score[i] - jmin));
    sum += dist.probability[i];
  }
  for (auto& p : dist.probability) p /= sum;
  dist.log_z = std::log(sum) - beta * jmin;
  dist.z = std::exp(dist.log_z);
  return dist;
}

/// Deliberately gerrymandered plan: packs the highest Democratic-share cells
/// into ceil(D/4) districts by contiguous greedy accretion, then grows the
/// remaining districts by balanced spread. Districts are always connected
/// and nonempty; an infeasible layout raises an error.
inline Plan plant_packed_plan(const DistrictGraph& g, const VoteTable& votes,
                              int num_districts) {
  int n = g.size();
  if (num_districts < 1 || num_districts > n)
    throw PreconditionError("district count out of range");
  std::vector<double> share(n);
  for (int v = 0; v < n; ++v) {
    double t = votes.dem[v] + votes.rep[v];
    share[v] = t > 0 ? votes.dem[v] / t : 0.5;
  }
  std::vector<int32_t> label(n, 0);
  double ideal = g.total_population() / num_districts;
  int packed = (num_districts + 3) / 4;

  for (int d = 1; d <= packed; ++d) {
    int seed = -1;
    for (int v = 0; v < n; ++v) {
      if (label[v] == 0 && (seed < 0 || share[v] > share[seed])) seed = v;
    }
    if (seed < 0) throw Error("packed plan: ran out of cells");
    label[seed] = d;
    double pop = g.unit(seed).population;
    while (pop < ideal) {
      int best = -1;
      for (int v = 0; v < n; ++v) {
        if (label[v] != d) continue;
        for (const auto& he : g.neighbors(v)) {
          if (label[he.to] == 0 && (best < 0 || share[he.to] > share[best])) best = he.to;
        }
      }
      if (best < 0) break;  // nothing adjacent left
      label[best] = d;
      pop += g.unit(best).population;
    }
  }

  // Spread seeds for the remaining districts: farthest-point sampling over
  // the unassigned region (unreachable cells count as infinitely far, which
  // places seeds into every leftover component first).
  int fill = num_districts - packed;
  std::vector<int> seeds;
  if (fill > 0) {
    std::vector<int> dist(n, -1);
    std::deque<int> queue;
    auto bfs_from = [&](int s) {
      std::fill(dist.begin(), dist.end(), -1);
      queue.clear();
      for (int x : seeds) {
        dist[x] = 0;
        queue.push_back(x);
      }
      if (s >= 0) {
        dist[s] = 0;
        queue.push_back(s);
      }
      while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        for (const auto& he : g.neighbors(v)) {
          if (label[he.to] == 0 && dist[he.to] < 0) {
            dist[he.to] = dist[v] + 1;
            queue.push_back(he.to);
          }
        }
      }
    };
    for (int k = 0; k < fill; ++k) {
      int pick = -1;
      if (seeds.empty()) {
        for (int v = 0; v < n; ++v) {
          if (label[v] == 0) {
            pick = v;
            break;
          }
        }
      } else {
        bfs_from(-1);
        long best_d = -1;
        for (int v = 0; v < n; ++v) {
          if (label[v] != 0) continue;
          long dv = dist[v] < 0 ? std::numeric_limits<long>::max() : dist[v];
          if (dv > best_d) {
            best_d = dv;
            pick = v;
          }
        }
      }
      if (pick < 0) throw Error("packed plan: not enough unassigned cells for seeds");
      seeds.push_back(pick);
      label[pick] = packed + 1 + k;
    }
  }

  // Balanced growth: the lightest growable district absorbs one adjacent
  // unassigned cell per round.
  std::vector<double> dpop(num_districts + 1, 0);
  for (int v = 0; v < n; ++v) {
    if (label[v] > 0) dpop[label[v]] += g.unit(v).population;
  }
  bool progress = true;
  while (progress) {
    progress = false;
    int best_d = -1, best_v = -1;
    for (int d = packed + 1; d <= num_districts; ++d) {
      if (best_d >= 0 && dpop[d] >= dpop[best_d]) continue;
      int cand = -1;
      for (int v = 0; v < n && cand < 0; ++v) {
        if (label[v] != d) continue;
        for (const auto& he : g.neighbors(v)) {
          if (label[he.to] == 0) {
            cand = he.to;
            break;
          }
        }
      }
      if (cand >= 0) {
        best_d = d;
        best_v = cand;
      }
    }
    if (best_d >= 0) {
      label[best_v] = best_d;
      dpop[best_d] += g.unit(best_v).population;
      progress = true;
    }
  }
  // Pockets reachable only through packed districts: append each to an
  // adjacent assigned district.
  for (bool again = true; again;) {
    again = false;
    for (int v = 0; v < n; ++v) {
      if (label[v] != 0) continue;
      for (const auto& he : g.neighbors(v)) {
        if (label[he.to] != 0) {
          label[v] = label[he.to];
          again = true;
          break;
        }
      }
    }
  }
  for (int v = 0; v < n; ++v) {
    if (label[v] == 0) throw Error("packed plan: disconnected leftover cells");
  }

  Plan plan{num_districts, std::move(label)};
  PlanState state(g, plan);
  for (int d = 1; d <= num_districts; ++d) {
    if (!state.is_contiguous(d))
      throw Error("packed plan: district " + std::to_string(d) + " is not contiguous");
  }
  return plan;
}

}  // namespace flipchain
