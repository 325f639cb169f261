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

#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "flipchain/plan.hpp"
#include "flipchain/rng.hpp"
#include "flipchain/synth.hpp"

namespace testutil {

using flipchain::Adjacency;
using flipchain::DistrictGraph;
using flipchain::Plan;
using flipchain::SplitMix64;
using flipchain::Vtd;

inline Vtd unit(std::string id, double pop, double area, double minority,
                std::string county, double outer) {
  Vtd u;
  u.id = std::move(id);
  u.population = pop;
  u.area = area;
  u.minority_population = minority;
  u.county = std::move(county);
  u.outer_boundary_length = outer;
  return u;
}

/// rows x cols grid with custom per-cell population/minority/county.
inline DistrictGraph custom_grid(
    int rows, int cols, const std::function<double(int, int)>& pop,
    const std::function<double(int, int)>& minority = nullptr,
    const std::function<std::string(int, int)>& county = nullptr) {
  std::vector<Vtd> units;
  std::vector<Adjacency> adj;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      Vtd u;
      u.id = flipchain::grid_cell_id(r, c);
      u.population = pop(r, c);
      u.area = 1.0;
      u.minority_population = minority ? minority(r, c) : 0.0;
      u.county = county ? county(r, c) : "one";
      u.outer_boundary_length = (r == 0) + (r == rows - 1) + (c == 0) + (c == cols - 1);
      u.bbox = flipchain::BoundingBox{double(c), double(r), double(c + 1), double(r + 1)};
      units.push_back(std::move(u));
      if (c + 1 < cols)
        adj.push_back({flipchain::grid_cell_id(r, c), flipchain::grid_cell_id(r, c + 1), 1.0});
      if (r + 1 < rows)
        adj.push_back({flipchain::grid_cell_id(r, c), flipchain::grid_cell_id(r + 1, c), 1.0});
    }
  }
  return DistrictGraph(std::move(units), std::move(adj));
}

inline DistrictGraph unit_grid(int rows, int cols) {
  return custom_grid(rows, cols, [](int, int) { return 1.0; });
}

/// Path graph a0 - a1 - ... - a(n-1), unit everything.
inline DistrictGraph path_graph(int n) {
  std::vector<Vtd> units;
  std::vector<Adjacency> adj;
  for (int i = 0; i < n; ++i) {
    units.push_back(unit("a" + std::to_string(i), 1, 1, 0, "one", i == 0 || i == n - 1 ? 3 : 2));
  }
  for (int i = 0; i + 1 < n; ++i)
    adj.push_back({"a" + std::to_string(i), "a" + std::to_string(i + 1), 1.0});
  return DistrictGraph(std::move(units), std::move(adj));
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
  void merge(int a, int b) { parent[find(a)] = find(b); }
};

/// Independent contiguity oracle.
inline bool district_connected_oracle(const DistrictGraph& g, const Plan& plan, int district) {
  UnionFind uf(g.size());
  for (const auto& e : g.edges()) {
    if (plan.assignment[e.a] == district && plan.assignment[e.b] == district) uf.merge(e.a, e.b);
  }
  int root = -1, members = 0;
  bool one_component = true;
  for (int32_t v = 0; v < g.size(); ++v) {
    if (plan.assignment[v] != district) continue;
    ++members;
    if (root < 0)
      root = uf.find(v);
    else if (uf.find(v) != root)
      one_component = false;
  }
  return members > 0 && one_component;
}

/// Connected plan built by random multi-seed growth; every district nonempty
/// and contiguous by construction.
inline Plan random_valid_plan(const DistrictGraph& g, int districts, SplitMix64& rng) {
  int n = g.size();
  Plan plan{districts, std::vector<int32_t>(n, 0)};
  std::vector<int32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int i = n - 1; i > 0; --i)
    std::swap(order[i], order[rng.next_below(static_cast<uint64_t>(i) + 1)]);
  for (int d = 1; d <= districts; ++d) plan.assignment[order[d - 1]] = d;
  for (;;) {
    std::vector<std::pair<int32_t, int32_t>> frontier;  // (vertex, district)
    for (int32_t v = 0; v < n; ++v) {
      if (plan.assignment[v] != 0) continue;
      for (const auto& he : g.neighbors(v)) {
        if (plan.assignment[he.to] != 0) frontier.push_back({v, plan.assignment[he.to]});
      }
    }
    if (frontier.empty()) break;
    auto [v, d] = frontier[rng.next_below(frontier.size())];
    plan.assignment[v] = d;
  }
  return plan;
}

/// Uniform random labeling (districts may be disconnected); retries until
/// every district is nonempty.
inline Plan random_labeling(const DistrictGraph& g, int districts, SplitMix64& rng) {
  for (;;) {
    Plan plan{districts, std::vector<int32_t>(g.size())};
    std::vector<int> count(districts + 1, 0);
    for (auto& l : plan.assignment) {
      l = 1 + static_cast<int32_t>(rng.next_below(districts));
      count[l]++;
    }
    bool ok = true;
    for (int d = 1; d <= districts; ++d) ok = ok && count[d] > 0;
    if (ok) return plan;
  }
}

/// A uniformly random proposable flip that neither empties nor disconnects
/// its donor district. Returns false if none exists.
inline bool random_valid_flip(const flipchain::PlanState& state, SplitMix64& rng, int32_t* vtd,
                              int32_t* to) {
  const auto& g = state.graph();
  for (int attempt = 0; attempt < 1000; ++attempt) {
    int32_t c = state.conflicted_count();
    if (c == 0) return false;
    int32_t e = state.conflicted_edges()[rng.next_below(c)];
    const auto& edge = g.edges()[e];
    bool flip_a = rng.next_bool();
    int32_t v = flip_a ? edge.a : edge.b;
    int32_t other = flip_a ? edge.b : edge.a;
    if (state.aggregate(state.label_of(v)).vtd_count <= 1) continue;
    if (!state.flip_keeps_donor_connected(v)) continue;
    *vtd = v;
    *to = state.label_of(other);
    return true;
  }
  return false;
}

}  // namespace testutil
