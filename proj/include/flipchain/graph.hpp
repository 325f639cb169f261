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
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "flipchain/csv.hpp"
#include "flipchain/errors.hpp"

namespace flipchain {

struct BoundingBox {
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;

  void expand(const BoundingBox& other) {
    min_x = std::min(min_x, other.min_x);
    min_y = std::min(min_y, other.min_y);
    max_x = std::max(max_x, other.max_x);
    max_y = std::max(max_y, other.max_y);
  }
  double area() const { return (max_x - min_x) * (max_y - min_y); }
  bool operator==(const BoundingBox&) const = default;
};

/// One voting tabulation district: the atomic unit of a plan.
/// `outer_boundary_length` is the border shared with the state exterior;
/// interior units carry 0. Lengths are km, areas km² (any consistent pair
/// works; compactness thresholds assume the same convention as the data).
struct Vtd {
  std::string id;
  double population = 0;
  double area = 0;
  double minority_population = 0;
  std::string county;
  double outer_boundary_length = 0;
  std::optional<BoundingBox> bbox;
};

/// Positive-length shared border between two units. Units that touch only at
/// a point must not appear here; contiguity is defined by this edge list.
struct Adjacency {
  std::string vtd_a;
  std::string vtd_b;
  double shared_perimeter = 0;
};

struct ValidationIssue {
  std::string code;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const { return issues.empty(); }
  void add(std::string code, std::string message) {
    issues.push_back({std::move(code), std::move(message)});
  }
  std::string to_string() const {
    std::string s;
    for (const auto& i : issues) {
      if (!s.empty()) s += "; ";
      s += i.code + ": " + i.message;
    }
    return s;
  }
};

/// Immutable weighted adjacency graph of voting units. Vertices are indexed
/// 0..size()-1 in input order; the implicit "outside" vertex is not
/// materialized, its incident border lengths live in outer_boundary_length.
/// Safe to share read-only across threads once constructed.
class DistrictGraph {
 public:
  struct HalfEdge {
    int32_t to;
    int32_t edge;  // index into edges()
    double length;
  };
  struct Edge {
    int32_t a;
    int32_t b;
    double length;
  };

  /// Builds the graph. Throws InputError on structural problems (duplicate
  /// ids, unknown endpoints, self loops, duplicate pairs). Semantic issues
  /// (bad areas, minority > population, disconnectedness) are left to
  /// validate(); load_graph() enforces both.
  DistrictGraph(std::vector<Vtd> units, std::vector<Adjacency> adjacencies) {
    units_ = std::move(units);
    index_.reserve(units_.size() * 2);
    for (size_t i = 0; i < units_.size(); ++i) {
      auto [it, inserted] = index_.emplace(units_[i].id, static_cast<int32_t>(i));
      if (!inserted) throw InputError("duplicate id: `" + units_[i].id + "`");
    }
    county_of_.resize(units_.size());
    {
      std::map<std::string, int32_t> county_ids;  // ordered: county index is name order
      for (const auto& u : units_) county_ids.emplace(u.county, 0);
      int32_t next = 0;
      for (auto& [name, cid] : county_ids) {
        cid = next++;
        county_names_.push_back(name);
      }
      for (size_t i = 0; i < units_.size(); ++i) county_of_[i] = county_ids[units_[i].county];
    }
    county_sizes_.assign(county_names_.size(), 0);
    for (size_t i = 0; i < units_.size(); ++i) county_sizes_[county_of_[i]]++;

    edges_.reserve(adjacencies.size());
    std::unordered_map<uint64_t, int> seen_pairs;
    for (const auto& adj : adjacencies) {
      auto ia = index_.find(adj.vtd_a);
      auto ib = index_.find(adj.vtd_b);
      if (ia == index_.end()) throw InputError("edge endpoint not a known unit: `" + adj.vtd_a + "`");
      if (ib == index_.end()) throw InputError("edge endpoint not a known unit: `" + adj.vtd_b + "`");
      int32_t a = ia->second, b = ib->second;
      if (a == b) throw InputError("self loop on unit `" + adj.vtd_a + "`");
      if (a > b) std::swap(a, b);
      uint64_t key = (static_cast<uint64_t>(a) << 32) | static_cast<uint32_t>(b);
      if (!seen_pairs.emplace(key, 1).second) {
        throw InputError("duplicate adjacency: `" + adj.vtd_a + "` / `" + adj.vtd_b + "`");
      }
      edges_.push_back({a, b, adj.shared_perimeter});
    }

    // CSR neighbor lists.
    offsets_.assign(units_.size() + 1, 0);
    for (const auto& e : edges_) {
      offsets_[e.a + 1]++;
      offsets_[e.b + 1]++;
    }
    for (size_t i = 1; i < offsets_.size(); ++i) offsets_[i] += offsets_[i - 1];
    half_edges_.resize(edges_.size() * 2);
    std::vector<int32_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (size_t ei = 0; ei < edges_.size(); ++ei) {
      const auto& e = edges_[ei];
      half_edges_[cursor[e.a]++] = {e.b, static_cast<int32_t>(ei), e.length};
      half_edges_[cursor[e.b]++] = {e.a, static_cast<int32_t>(ei), e.length};
    }

    for (const auto& u : units_) {
      total_population_ += u.population;
      total_area_ += u.area;
    }
    has_bboxes_ = !units_.empty() &&
                  std::all_of(units_.begin(), units_.end(),
                              [](const Vtd& u) { return u.bbox.has_value(); });
  }

  int32_t size() const { return static_cast<int32_t>(units_.size()); }
  int32_t num_edges() const { return static_cast<int32_t>(edges_.size()); }
  int32_t num_counties() const { return static_cast<int32_t>(county_names_.size()); }

  const Vtd& unit(int32_t v) const { return units_[v]; }
  const std::vector<Vtd>& units() const { return units_; }
  const std::vector<Edge>& edges() const { return edges_; }
  int32_t county_of(int32_t v) const { return county_of_[v]; }
  const std::string& county_name(int32_t c) const { return county_names_[c]; }
  int32_t county_size(int32_t c) const { return county_sizes_[c]; }

  std::span<const HalfEdge> neighbors(int32_t v) const {
    return {half_edges_.data() + offsets_[v],
            half_edges_.data() + offsets_[v + 1]};
  }

  int32_t index_of(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw InputError("unknown unit id: `" + id + "`");
    return it->second;
  }
  const int32_t* find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &it->second;
  }

  double total_population() const { return total_population_; }
  double total_area() const { return total_area_; }
  bool has_bboxes() const { return has_bboxes_; }

  /// Connected components over the unit graph (outside vertex excluded).
  std::vector<std::vector<int32_t>> components() const {
    std::vector<std::vector<int32_t>> comps;
    std::vector<char> seen(units_.size(), 0);
    std::vector<int32_t> queue;
    for (int32_t start = 0; start < size(); ++start) {
      if (seen[start]) continue;
      comps.emplace_back();
      auto& comp = comps.back();
      queue.clear();
      queue.push_back(start);
      seen[start] = 1;
      while (!queue.empty()) {
        int32_t v = queue.back();
        queue.pop_back();
        comp.push_back(v);
        for (const auto& he : neighbors(v)) {
          if (!seen[he.to]) {
            seen[he.to] = 1;
            queue.push_back(he.to);
          }
        }
      }
      std::sort(comp.begin(), comp.end());
    }
    return comps;
  }

 private:
  std::vector<Vtd> units_;
  std::unordered_map<std::string, int32_t> index_;
  std::vector<int32_t> county_of_;
  std::vector<std::string> county_names_;
  std::vector<int32_t> county_sizes_;
  std::vector<Edge> edges_;
  std::vector<int32_t> offsets_;
  std::vector<HalfEdge> half_edges_;
  double total_population_ = 0;
  double total_area_ = 0;
  bool has_bboxes_ = false;
};

/// Checks every data invariant; violations are data, not errors.
inline ValidationReport validate_graph(const DistrictGraph& g) {
  ValidationReport report;
  for (int32_t v = 0; v < g.size(); ++v) {
    const Vtd& u = g.unit(v);
    if (!(u.area > 0)) report.add("NonPositiveArea", "unit `" + u.id + "` has area " + format_double(u.area));
    if (u.population < 0) report.add("NegativePopulation", "unit `" + u.id + "`");
    if (u.minority_population < 0) report.add("NegativeMinority", "unit `" + u.id + "`");
    if (u.minority_population > u.population) {
      report.add("MinorityExceedsPopulation",
                 "unit `" + u.id + "`: " + format_double(u.minority_population) + " > " +
                     format_double(u.population));
    }
    if (u.outer_boundary_length < 0) report.add("NegativeOuterBoundary", "unit `" + u.id + "`");
  }
  for (const auto& e : g.edges()) {
    if (!(e.length > 0)) {
      report.add("NonPositiveSharedPerimeter",
                 "edge `" + g.unit(e.a).id + "`/`" + g.unit(e.b).id + "` has length " +
                     format_double(e.length));
    }
  }
  if (g.size() > 0) {
    auto comps = g.components();
    if (comps.size() > 1) {
      std::string msg = std::to_string(comps.size()) + " components:";
      for (const auto& comp : comps) {
        msg += " {";
        for (size_t i = 0; i < comp.size() && i < 8; ++i)
          msg += (i ? "," : "") + g.unit(comp[i]).id;
        if (comp.size() > 8) msg += ",...";
        msg += "}";
      }
      report.add("Disconnected", msg);
    }
  } else {
    report.add("Empty", "graph has no units");
  }
  return report;
}

namespace detail {
inline const std::vector<std::string> kNodeHeader = {
    "id", "population", "area", "minority_population", "county", "outer_boundary_length"};
inline const std::vector<std::string> kNodeHeaderBBox = {
    "id", "population", "area", "minority_population", "county", "outer_boundary_length",
    "min_x", "min_y", "max_x", "max_y"};
inline const std::vector<std::string> kEdgeHeader = {"id_a", "id_b", "shared_perimeter"};
}  // namespace detail

/// Loads and fully validates a graph from the two tabular streams.
inline DistrictGraph load_graph(std::istream& nodes_source, std::istream& edges_source) {
  CsvTable nodes = read_csv(nodes_source, "nodes");
  bool with_bbox = nodes.header.size() == detail::kNodeHeaderBBox.size();
  require_header(nodes, with_bbox ? detail::kNodeHeaderBBox : detail::kNodeHeader, "nodes");

  std::vector<Vtd> units;
  units.reserve(nodes.rows.size());
  for (const auto& row : nodes.rows) {
    Vtd u;
    u.id = row[0];
    const std::string ctx = "nodes unit `" + u.id + "`";
    u.population = parse_double(row[1], ctx);
    u.area = parse_double(row[2], ctx);
    u.minority_population = parse_double(row[3], ctx);
    u.county = row[4];
    u.outer_boundary_length = parse_double(row[5], ctx);
    if (with_bbox) {
      u.bbox = BoundingBox{parse_double(row[6], ctx), parse_double(row[7], ctx),
                           parse_double(row[8], ctx), parse_double(row[9], ctx)};
    }
    units.push_back(std::move(u));
  }

  CsvTable edges = read_csv(edges_source, "edges");
  require_header(edges, detail::kEdgeHeader, "edges");
  std::vector<Adjacency> adjacencies;
  adjacencies.reserve(edges.rows.size());
  for (const auto& row : edges.rows) {
    adjacencies.push_back(
        {row[0], row[1], parse_double(row[2], "edges `" + row[0] + "`/`" + row[1] + "`")});
  }

  DistrictGraph g(std::move(units), std::move(adjacencies));
  ValidationReport report = validate_graph(g);
  if (!report.ok()) throw InputError("invalid graph: " + report.to_string());
  return g;
}

inline void write_nodes_csv(std::ostream& out, const DistrictGraph& g) {
  bool with_bbox = g.has_bboxes();
  const auto& header = with_bbox ? detail::kNodeHeaderBBox : detail::kNodeHeader;
  for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (int32_t v = 0; v < g.size(); ++v) {
    const Vtd& u = g.unit(v);
    out << u.id << ',' << format_double(u.population) << ',' << format_double(u.area) << ','
        << format_double(u.minority_population) << ',' << u.county << ','
        << format_double(u.outer_boundary_length);
    if (with_bbox) {
      out << ',' << format_double(u.bbox->min_x) << ',' << format_double(u.bbox->min_y) << ','
          << format_double(u.bbox->max_x) << ',' << format_double(u.bbox->max_y);
    }
    out << "\n";
  }
}

inline void write_edges_csv(std::ostream& out, const DistrictGraph& g) {
  out << "id_a,id_b,shared_perimeter\n";
  for (const auto& e : g.edges()) {
    out << g.unit(e.a).id << ',' << g.unit(e.b).id << ',' << format_double(e.length) << "\n";
  }
}

/// N_pop / D as a real number; deliberately not rounded.
inline double ideal_population(const DistrictGraph& g, int num_districts) {
  if (num_districts < 1) throw PreconditionError("num_districts must be >= 1");
  return g.total_population() / num_districts;
}

}  // namespace flipchain
