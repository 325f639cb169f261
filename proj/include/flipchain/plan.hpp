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
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "flipchain/graph.hpp"

namespace flipchain {

/// A district plan: every vertex carries a label in 1..num_districts.
/// Label 0 means "unassigned" and is only valid transiently while loading.
struct Plan {
  int num_districts = 0;
  std::vector<int32_t> assignment;  // indexed by graph vertex

  bool operator==(const Plan&) const = default;
};

/// Plan file format: `id,district` with 1-based labels, one row per unit,
/// emitted in graph vertex order. If num_districts is 0 it is inferred as
/// the maximum label present.
inline Plan load_plan_csv(std::istream& in, const DistrictGraph& g, int num_districts = 0) {
  CsvTable table = read_csv(in, "plan");
  require_header(table, {"id", "district"}, "plan");
  Plan plan;
  plan.assignment.assign(g.size(), 0);
  for (const auto& row : table.rows) {
    int32_t v = g.index_of(row[0]);
    if (plan.assignment[v] != 0) throw InputError("plan: duplicate assignment for `" + row[0] + "`");
    long long label = parse_int(row[1], "plan `" + row[0] + "`");
    if (label < 1) throw InputError("plan: label must be >= 1 for `" + row[0] + "`");
    plan.assignment[v] = static_cast<int32_t>(label);
  }
  int32_t max_label = 0;
  for (int32_t v = 0; v < g.size(); ++v) {
    if (plan.assignment[v] == 0)
      throw InputError("UnlabeledVtd: unit `" + g.unit(v).id + "` has no district assignment");
    max_label = std::max(max_label, plan.assignment[v]);
  }
  plan.num_districts = num_districts > 0 ? num_districts : max_label;
  return plan;
}

inline void write_plan_csv(std::ostream& out, const DistrictGraph& g, const Plan& plan) {
  out << "id,district\n";
  for (int32_t v = 0; v < g.size(); ++v) out << g.unit(v).id << ',' << plan.assignment[v] << "\n";
}

/// Relabels districts by first occurrence in vertex order. Two plans are the
/// same partition iff their canonical keys are equal.
inline std::vector<int32_t> canonical_partition_key(const Plan& plan) {
  std::vector<int32_t> remap(plan.num_districts + 1, 0);
  std::vector<int32_t> key(plan.assignment.size());
  int32_t next = 0;
  for (size_t v = 0; v < plan.assignment.size(); ++v) {
    int32_t& m = remap[plan.assignment[v]];
    if (m == 0) m = ++next;
    key[v] = m;
  }
  return key;
}

/// Cached per-district totals. Sums of unit attributes plus the district
/// boundary length (conflicted borders and exterior border of members).
struct DistrictAggregate {
  double population = 0;
  double area = 0;
  double minority_population = 0;
  double boundary_length = 0;
  int32_t vtd_count = 0;

  bool operator==(const DistrictAggregate&) const = default;
};

/// Everything needed to undo one flip exactly: the touched scalars are
/// restored from snapshots, the conflicted-edge list by replaying its edits
/// in reverse, so apply+revert is bit-identical.
struct FlipDelta {
  int32_t vtd = -1;
  int32_t old_label = 0;
  int32_t new_label = 0;
  int32_t conflicted_delta = 0;

  DistrictAggregate donor_before, donor_after;
  DistrictAggregate acceptor_before, acceptor_after;

  struct ConflictOp {
    int32_t edge;
    int32_t pos;  // position at removal time (added ops: position pushed)
    bool added;
  };
  std::vector<ConflictOp> conflict_ops;

  int32_t county = -1;
  int32_t county_cnt_donor_before = 0;
  int32_t county_cnt_acceptor_before = 0;
  int8_t county_class_before = 0;
  double county_w_before = 0;
  int32_t split2_count_before = 0, split3_count_before = 0;
  double split2_w_before = 0, split3_w_before = 0;

  bool bbox_tracked = false;
  BoundingBox donor_bbox_before{}, acceptor_bbox_before{};

  bool dev_tracked = false;
  int32_t dev_donor_before = 0, dev_acceptor_before = 0;

  void reset() {
    vtd = -1;
    conflict_ops.clear();
  }
};

/// A mutable plan over an immutable graph with incrementally maintained
/// aggregates, county-split bookkeeping and the conflicted-edge set.
/// Single-owner mutable; distinct states over one shared graph may be used
/// from different threads.
class PlanState {
 public:
  PlanState(const DistrictGraph& g, Plan plan) : graph_(&g) {
    if (static_cast<int32_t>(plan.assignment.size()) != g.size())
      throw PreconditionError("plan labels " + std::to_string(plan.assignment.size()) +
                              " vertices, graph has " + std::to_string(g.size()));
    if (plan.num_districts < 1) throw PreconditionError("plan has no districts");
    num_districts_ = plan.num_districts;
    label_ = std::move(plan.assignment);
    for (int32_t v = 0; v < g.size(); ++v) {
      if (label_[v] == 0)
        throw PreconditionError("UnlabeledVtd: unit `" + g.unit(v).id + "` has no district");
      if (label_[v] < 1 || label_[v] > num_districts_)
        throw PreconditionError("label out of range 1.." + std::to_string(num_districts_) +
                                " for unit `" + g.unit(v).id + "`");
    }
    rebuild();
    for (int d = 1; d <= num_districts_; ++d) {
      if (agg_[d].vtd_count == 0)
        throw PreconditionError("EmptyDistrict: district " + std::to_string(d) + " has no units");
    }
  }

  const DistrictGraph& graph() const { return *graph_; }
  int num_districts() const { return num_districts_; }
  int32_t label_of(int32_t v) const { return label_[v]; }
  std::span<const int32_t> labels() const { return label_; }
  const DistrictAggregate& aggregate(int district) const { return agg_[district]; }

  Plan plan() const { return Plan{num_districts_, label_}; }

  int32_t conflicted_count() const { return static_cast<int32_t>(conflicted_.size()); }
  std::span<const int32_t> conflicted_edges() const { return conflicted_; }

  // County split summary: n2/w2 over counties intersecting exactly two
  // districts, n3/w3 over counties intersecting three or more.
  int32_t split2_count() const { return split2_count_; }
  double split2_w_sum() const { return split2_w_sum_; }
  int32_t split3_count() const { return split3_count_; }
  double split3_w_sum() const { return split3_w_sum_; }
  int32_t county_district_count(int32_t county, int district) const {
    return county_district_count_[county * num_districts_ + (district - 1)];
  }
  /// Number of distinct districts intersecting the county.
  int32_t county_split_ways(int32_t county) const {
    int32_t n = 0;
    for (int d = 1; d <= num_districts_; ++d) n += county_district_count(county, d) > 0;
    return n;
  }

  bool tracking_bboxes() const { return track_bboxes_; }
  void enable_bbox_tracking() {
    if (!graph_->has_bboxes())
      throw PreconditionError("bounding boxes required on every unit for dispersion tracking");
    track_bboxes_ = true;
    recompute_all_bboxes();
  }
  const BoundingBox& district_bbox(int district) const { return district_bbox_[district]; }

  /// Bounding box of a district computed from scratch (works without tracking).
  BoundingBox compute_district_bbox(int district) const {
    if (!graph_->has_bboxes())
      throw PreconditionError("unit bounding boxes missing; dispersion needs min_x..max_y");
    BoundingBox bb;
    bool first = true;
    for (int32_t v = 0; v < graph_->size(); ++v) {
      if (label_[v] != district) continue;
      if (first) {
        bb = *graph_->unit(v).bbox;
        first = false;
      } else {
        bb.expand(*graph_->unit(v).bbox);
      }
    }
    return bb;
  }

  bool has_reference() const { return !ref_label_.empty(); }
  /// Starts tracking per-district symmetric difference against a reference
  /// plan (same graph and district count).
  void set_reference(const Plan& reference) {
    if (static_cast<int32_t>(reference.assignment.size()) != graph_->size())
      throw PreconditionError("reference plan labels a different vertex set");
    if (reference.num_districts != num_districts_)
      throw PreconditionError("reference plan has different district count");
    ref_label_ = reference.assignment;
    dev_.assign(num_districts_ + 1, 0);
    for (int32_t v = 0; v < graph_->size(); ++v) {
      if (label_[v] != ref_label_[v]) {
        dev_[label_[v]]++;
        dev_[ref_label_[v]]++;
      }
    }
  }
  int32_t max_deviation_now() const {
    int32_t m = 0;
    for (int d = 1; d <= num_districts_; ++d) m = std::max(m, dev_[d]);
    return m;
  }
  /// Max per-district deviation if v were flipped to new_label.
  int32_t deviation_after_flip(int32_t v, int32_t new_label) const {
    int32_t from = label_[v];
    int32_t dev_from = dev_[from] + (ref_label_[v] == from ? 1 : -1);
    int32_t dev_to = dev_[new_label] + (ref_label_[v] == new_label ? -1 : 1);
    int32_t m = std::max(dev_from, dev_to);
    for (int d = 1; d <= num_districts_; ++d) {
      if (d != from && d != new_label) m = std::max(m, dev_[d]);
    }
    return m;
  }

  /// Max over districts of |D_i(plan) symmetric-difference D_i(reference)|.
  int32_t max_district_deviation(const Plan& reference) const {
    if (static_cast<int32_t>(reference.assignment.size()) != graph_->size())
      throw PreconditionError("reference plan labels a different vertex set");
    int D = std::max(num_districts_, reference.num_districts);
    std::vector<int32_t> dev(D + 1, 0);
    for (int32_t v = 0; v < graph_->size(); ++v) {
      if (label_[v] != reference.assignment[v]) {
        dev[label_[v]]++;
        dev[reference.assignment[v]]++;
      }
    }
    return *std::max_element(dev.begin(), dev.end());
  }

  bool is_contiguous(int district) const {
    int32_t n = agg_[district].vtd_count;
    if (n == 0) return false;
    int32_t start = -1;
    for (int32_t v = 0; v < graph_->size(); ++v) {
      if (label_[v] == district) {
        start = v;
        break;
      }
    }
    uint32_t mark = next_mark();
    bfs_queue_.clear();
    bfs_queue_.push_back(start);
    mark_[start] = mark;
    int32_t reached = 0;
    for (size_t head = 0; head < bfs_queue_.size(); ++head) {
      int32_t v = bfs_queue_[head];
      ++reached;
      for (const auto& he : graph_->neighbors(v)) {
        if (label_[he.to] == district && mark_[he.to] != mark) {
          mark_[he.to] = mark;
          bfs_queue_.push_back(he.to);
        }
      }
    }
    return reached == n;
  }

  /// Whether the donor district stays connected after removing v.
  /// Assumes v's district is currently connected (the chain maintains this);
  /// checks that all of v's same-district neighbors remain mutually reachable
  /// without v, which is equivalent under that assumption. The search stops
  /// as soon as all those neighbors are found, so typical cost is local.
  bool flip_keeps_donor_connected(int32_t v) const {
    int32_t district = label_[v];
    if (agg_[district].vtd_count <= 1) return false;  // removal empties it
    uint32_t mark = next_mark();
    int32_t targets = 0;
    int32_t first = -1;
    for (const auto& he : graph_->neighbors(v)) {
      if (label_[he.to] == district && mark_[he.to] != mark) {
        mark_[he.to] = mark;
        ++targets;
        first = he.to;
      }
    }
    if (targets == 0) return false;  // v was isolated within its district
    if (targets == 1) return true;   // leaf removal
    // BFS from one target, v excluded, until every target is seen.
    uint32_t visited = next_mark();
    bfs_queue_.clear();
    bfs_queue_.push_back(first);
    mark_[first] = visited;
    int32_t found = 1;
    for (size_t head = 0; head < bfs_queue_.size() && found < targets; ++head) {
      int32_t u = bfs_queue_[head];
      for (const auto& he : graph_->neighbors(u)) {
        int32_t w = he.to;
        if (w == v || label_[w] != district || mark_[w] == visited) continue;
        if (mark_[w] == mark) ++found;  // one of v's neighbors
        mark_[w] = visited;
        if (found == targets) return true;
        bfs_queue_.push_back(w);
      }
    }
    return found == targets;
  }

  /// Moves v to new_label, updating every cache in O(degree + D). The
  /// returned delta reverts the state exactly. Throws if the donor district
  /// would be emptied (callers treat that as a score of +infinity).
  void apply_flip(int32_t v, int32_t new_label, FlipDelta& delta) {
    int32_t from = label_[v];
    if (new_label < 1 || new_label > num_districts_)
      throw PreconditionError("flip label out of range");
    if (new_label == from) throw PreconditionError("flip to the same district");
    if (agg_[from].vtd_count == 1)
      throw PreconditionError("EmptiesDistrict: flip would empty district " +
                              std::to_string(from));

    delta.reset();
    delta.vtd = v;
    delta.old_label = from;
    delta.new_label = new_label;
    delta.donor_before = agg_[from];
    delta.acceptor_before = agg_[new_label];
    int32_t conflicted_before = conflicted_count();

    const Vtd& unit = graph_->unit(v);
    label_[v] = new_label;

    DistrictAggregate& donor = agg_[from];
    DistrictAggregate& acceptor = agg_[new_label];
    donor.population -= unit.population;
    donor.area -= unit.area;
    donor.minority_population -= unit.minority_population;
    donor.boundary_length -= unit.outer_boundary_length;
    donor.vtd_count -= 1;
    acceptor.population += unit.population;
    acceptor.area += unit.area;
    acceptor.minority_population += unit.minority_population;
    acceptor.boundary_length += unit.outer_boundary_length;
    acceptor.vtd_count += 1;

    for (const auto& he : graph_->neighbors(v)) {
      int32_t lu = label_[he.to];
      if (lu == from) {
        // was internal to the donor, now conflicted
        donor.boundary_length += he.length;
        acceptor.boundary_length += he.length;
        add_conflicted(he.edge, delta);
      } else if (lu == new_label) {
        // was conflicted, now internal to the acceptor
        donor.boundary_length -= he.length;
        acceptor.boundary_length -= he.length;
        remove_conflicted(he.edge, delta);
      } else {
        // conflicted both before and after; v's side changes district
        donor.boundary_length -= he.length;
        acceptor.boundary_length += he.length;
      }
    }

    // county bookkeeping
    int32_t c = graph_->county_of(v);
    delta.county = c;
    delta.county_cnt_donor_before = county_district_count(c, from);
    delta.county_cnt_acceptor_before = county_district_count(c, new_label);
    delta.county_class_before = county_class_[c];
    delta.county_w_before = county_w_[c];
    delta.split2_count_before = split2_count_;
    delta.split2_w_before = split2_w_sum_;
    delta.split3_count_before = split3_count_;
    delta.split3_w_before = split3_w_sum_;
    county_district_count_[c * num_districts_ + (from - 1)]--;
    county_district_count_[c * num_districts_ + (new_label - 1)]++;
    refresh_county(c);

    delta.bbox_tracked = track_bboxes_;
    if (track_bboxes_) {
      delta.donor_bbox_before = district_bbox_[from];
      delta.acceptor_bbox_before = district_bbox_[new_label];
      const BoundingBox& ub = *unit.bbox;
      if (acceptor.vtd_count == 1) {
        district_bbox_[new_label] = ub;
      } else {
        district_bbox_[new_label].expand(ub);
      }
      BoundingBox& db = district_bbox_[from];
      if (ub.min_x <= db.min_x || ub.min_y <= db.min_y || ub.max_x >= db.max_x ||
          ub.max_y >= db.max_y) {
        district_bbox_[from] = compute_district_bbox(from);
      }
    }

    delta.dev_tracked = !ref_label_.empty();
    if (delta.dev_tracked) {
      delta.dev_donor_before = dev_[from];
      delta.dev_acceptor_before = dev_[new_label];
      dev_[from] += ref_label_[v] == from ? 1 : -1;
      dev_[new_label] += ref_label_[v] == new_label ? -1 : 1;
    }

    delta.donor_after = agg_[from];
    delta.acceptor_after = agg_[new_label];
    delta.conflicted_delta = conflicted_count() - conflicted_before;
  }

  FlipDelta apply_flip(int32_t v, int32_t new_label) {
    FlipDelta delta;
    apply_flip(v, new_label, delta);
    return delta;
  }

  void revert(const FlipDelta& delta) {
    label_[delta.vtd] = delta.old_label;
    agg_[delta.old_label] = delta.donor_before;
    agg_[delta.new_label] = delta.acceptor_before;

    int32_t c = delta.county;
    county_district_count_[c * num_districts_ + (delta.old_label - 1)] =
        delta.county_cnt_donor_before;
    county_district_count_[c * num_districts_ + (delta.new_label - 1)] =
        delta.county_cnt_acceptor_before;
    county_class_[c] = delta.county_class_before;
    county_w_[c] = delta.county_w_before;
    split2_count_ = delta.split2_count_before;
    split2_w_sum_ = delta.split2_w_before;
    split3_count_ = delta.split3_count_before;
    split3_w_sum_ = delta.split3_w_before;

    if (delta.bbox_tracked) {
      district_bbox_[delta.old_label] = delta.donor_bbox_before;
      district_bbox_[delta.new_label] = delta.acceptor_bbox_before;
    }
    if (delta.dev_tracked) {
      dev_[delta.old_label] = delta.dev_donor_before;
      dev_[delta.new_label] = delta.dev_acceptor_before;
    }

    // Undo list edits newest-first so each positional record is valid again.
    for (auto it = delta.conflict_ops.rbegin(); it != delta.conflict_ops.rend(); ++it) {
      if (it->added) {
        edge_pos_[conflicted_.back()] = -1;
        conflicted_.pop_back();
      } else {
        int32_t p = it->pos;
        if (p == static_cast<int32_t>(conflicted_.size())) {
          conflicted_.push_back(it->edge);
        } else {
          int32_t moved = conflicted_[p];
          conflicted_.push_back(moved);
          edge_pos_[moved] = static_cast<int32_t>(conflicted_.size()) - 1;
          conflicted_[p] = it->edge;
        }
        edge_pos_[it->edge] = p;
      }
    }
  }

  /// Compares against a from-scratch rebuild: integer fields exactly, reals
  /// to `tol` relative, conflicted edges as a set. Throws on mismatch.
  void check_consistency(double tol = 1e-9) const {
    PlanState fresh(*graph_, plan());
    auto close = [tol](double a, double b) {
      return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
    };
    for (int d = 1; d <= num_districts_; ++d) {
      const auto& x = agg_[d];
      const auto& y = fresh.agg_[d];
      if (x.vtd_count != y.vtd_count || !close(x.population, y.population) ||
          !close(x.area, y.area) || !close(x.minority_population, y.minority_population) ||
          !close(x.boundary_length, y.boundary_length)) {
        throw Error("aggregate drift in district " + std::to_string(d));
      }
    }
    std::vector<int32_t> a(conflicted_.begin(), conflicted_.end());
    std::vector<int32_t> b(fresh.conflicted_.begin(), fresh.conflicted_.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) throw Error("conflicted edge set drift");
    if (county_district_count_ != fresh.county_district_count_)
      throw Error("county intersection count drift");
    if (split2_count_ != fresh.split2_count_ || split3_count_ != fresh.split3_count_ ||
        !close(split2_w_sum_, fresh.split2_w_sum_) || !close(split3_w_sum_, fresh.split3_w_sum_))
      throw Error("county split summary drift");
  }

  /// Bitwise structural equality across every cache, list order included.
  bool identical(const PlanState& o) const {
    return label_ == o.label_ && agg_ == o.agg_ && conflicted_ == o.conflicted_ &&
           edge_pos_ == o.edge_pos_ && county_district_count_ == o.county_district_count_ &&
           county_class_ == o.county_class_ && county_w_ == o.county_w_ &&
           split2_count_ == o.split2_count_ && split2_w_sum_ == o.split2_w_sum_ &&
           split3_count_ == o.split3_count_ && split3_w_sum_ == o.split3_w_sum_ &&
           dev_ == o.dev_ &&
           (!track_bboxes_ || district_bbox_ == o.district_bbox_);
  }

 private:
  void rebuild() {
    agg_.assign(num_districts_ + 1, DistrictAggregate{});
    for (int32_t v = 0; v < graph_->size(); ++v) {
      const Vtd& u = graph_->unit(v);
      DistrictAggregate& a = agg_[label_[v]];
      a.population += u.population;
      a.area += u.area;
      a.minority_population += u.minority_population;
      a.boundary_length += u.outer_boundary_length;
      a.vtd_count += 1;
    }
    conflicted_.clear();
    edge_pos_.assign(graph_->num_edges(), -1);
    for (int32_t e = 0; e < graph_->num_edges(); ++e) {
      const auto& edge = graph_->edges()[e];
      if (label_[edge.a] != label_[edge.b]) {
        edge_pos_[e] = static_cast<int32_t>(conflicted_.size());
        conflicted_.push_back(e);
        agg_[label_[edge.a]].boundary_length += edge.length;
        agg_[label_[edge.b]].boundary_length += edge.length;
      }
    }
    county_district_count_.assign(static_cast<size_t>(graph_->num_counties()) * num_districts_, 0);
    for (int32_t v = 0; v < graph_->size(); ++v) {
      county_district_count_[graph_->county_of(v) * num_districts_ + (label_[v] - 1)]++;
    }
    county_class_.assign(graph_->num_counties(), 0);
    county_w_.assign(graph_->num_counties(), 0.0);
    split2_count_ = split3_count_ = 0;
    split2_w_sum_ = split3_w_sum_ = 0.0;
    for (int32_t c = 0; c < graph_->num_counties(); ++c) refresh_county(c);
    mark_.assign(graph_->size(), 0);
    mark_epoch_ = 0;
    if (track_bboxes_) recompute_all_bboxes();
    if (!ref_label_.empty()) {
      Plan ref{num_districts_, ref_label_};
      set_reference(ref);
    }
  }

  void refresh_county(int32_t c) {
    int8_t old_class = county_class_[c];
    double old_w = county_w_[c];
    if (old_class == 2) {
      split2_count_--;
      split2_w_sum_ -= old_w;
    } else if (old_class == 3) {
      split3_count_--;
      split3_w_sum_ -= old_w;
    }
    int32_t distinct = 0, top1 = 0, top2 = 0;
    const int32_t* row = &county_district_count_[c * num_districts_];
    for (int d = 0; d < num_districts_; ++d) {
      int32_t cnt = row[d];
      if (cnt > 0) {
        ++distinct;
        if (cnt > top1) {
          top2 = top1;
          top1 = cnt;
        } else if (cnt > top2) {
          top2 = cnt;
        }
      }
    }
    double total = graph_->county_size(c);
    int8_t cls;
    double w;
    if (distinct <= 1) {
      cls = static_cast<int8_t>(distinct);
      w = 0.0;
    } else if (distinct == 2) {
      cls = 2;
      w = std::sqrt(top2 / total);
    } else {
      cls = 3;
      w = std::sqrt((total - top1 - top2) / total);
    }
    county_class_[c] = cls;
    county_w_[c] = w;
    if (cls == 2) {
      split2_count_++;
      split2_w_sum_ += w;
    } else if (cls == 3) {
      split3_count_++;
      split3_w_sum_ += w;
    }
  }

  void add_conflicted(int32_t e, FlipDelta& delta) {
    int32_t pos = static_cast<int32_t>(conflicted_.size());
    edge_pos_[e] = pos;
    conflicted_.push_back(e);
    delta.conflict_ops.push_back({e, pos, true});
  }

  void remove_conflicted(int32_t e, FlipDelta& delta) {
    int32_t p = edge_pos_[e];
    delta.conflict_ops.push_back({e, p, false});
    int32_t last = conflicted_.back();
    conflicted_[p] = last;
    edge_pos_[last] = p;  // when e is the tail this writes then clears below
    conflicted_.pop_back();
    edge_pos_[e] = -1;
  }

  void recompute_all_bboxes() {
    district_bbox_.assign(num_districts_ + 1, BoundingBox{});
    for (int d = 1; d <= num_districts_; ++d) district_bbox_[d] = compute_district_bbox(d);
  }

  uint32_t next_mark() const {
    if (++mark_epoch_ == 0) {
      std::fill(mark_.begin(), mark_.end(), 0);
      mark_epoch_ = 1;
    }
    return mark_epoch_;
  }

  const DistrictGraph* graph_;
  int num_districts_ = 0;
  std::vector<int32_t> label_;
  std::vector<DistrictAggregate> agg_;  // index d in 1..D; [0] unused
  std::vector<int32_t> conflicted_;
  std::vector<int32_t> edge_pos_;  // edge -> index in conflicted_, or -1
  std::vector<int32_t> county_district_count_;
  std::vector<int8_t> county_class_;
  std::vector<double> county_w_;
  int32_t split2_count_ = 0, split3_count_ = 0;
  double split2_w_sum_ = 0, split3_w_sum_ = 0;
  bool track_bboxes_ = false;
  std::vector<BoundingBox> district_bbox_;
  std::vector<int32_t> ref_label_;
  std::vector<int32_t> dev_;
  mutable std::vector<uint32_t> mark_;
  mutable uint32_t mark_epoch_ = 0;
  mutable std::vector<int32_t> bfs_queue_;
};

/// Free-function constructor: validates the plan and builds all caches.
inline PlanState new_plan_state(const DistrictGraph& g, Plan p) {
  return PlanState(g, std::move(p));
}

}  // namespace flipchain
