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
#include <span>
#include <string>
#include <vector>

#include "flipchain/plan.hpp"

namespace flipchain {

/// Fixed per-unit two-party vote counts for one election. Third-party votes
/// are excluded at ingestion; zero-vote units are allowed.
struct VoteTable {
  std::string election;
  std::vector<double> dem;  // by graph vertex
  std::vector<double> rep;
};

/// votes.csv: header `id,dem,rep`. Every graph unit must appear exactly
/// once; an id not present in the graph is a hard error so join mistakes
/// surface early.
inline VoteTable load_votes_csv(std::istream& in, const DistrictGraph& g,
                                std::string election = "") {
  CsvTable table = read_csv(in, "votes");
  require_header(table, {"id", "dem", "rep"}, "votes");
  VoteTable votes;
  votes.election = std::move(election);
  votes.dem.assign(g.size(), -1.0);
  votes.rep.assign(g.size(), -1.0);
  for (const auto& row : table.rows) {
    int32_t v = g.index_of(row[0]);  // throws on unknown id
    if (votes.dem[v] >= 0) throw InputError("votes: duplicate entry for `" + row[0] + "`");
    votes.dem[v] = parse_double(row[1], "votes `" + row[0] + "` dem");
    votes.rep[v] = parse_double(row[2], "votes `" + row[0] + "` rep");
    if (votes.dem[v] < 0 || votes.rep[v] < 0)
      throw InputError("votes: negative count for `" + row[0] + "`");
  }
  for (int32_t v = 0; v < g.size(); ++v) {
    if (votes.dem[v] < 0)
      throw InputError("votes: no entry for unit `" + g.unit(v).id + "`");
  }
  return votes;
}

inline void write_votes_csv(std::ostream& out, const DistrictGraph& g, const VoteTable& votes) {
  out << "id,dem,rep\n";
  for (int32_t v = 0; v < g.size(); ++v) {
    out << g.unit(v).id << ',' << format_double(votes.dem[v]) << ','
        << format_double(votes.rep[v]) << "\n";
  }
}

struct DistrictResult {
  int district = 0;
  double dem_votes = 0;
  double rep_votes = 0;
  double dem_share = 0;  // two-party share
  bool dem_win = false;  // share > 0.5; an exact 50.000% tie goes Republican
};

/// Re-tallies the vote table under a plan. A district whose two-party total
/// is zero has no defined share and is an error.
inline std::vector<DistrictResult> tally(const DistrictGraph& g, const Plan& plan,
                                         const VoteTable& votes) {
  if (static_cast<int32_t>(plan.assignment.size()) != g.size())
    throw PreconditionError("plan labels a different vertex set than the graph");
  std::vector<DistrictResult> results(plan.num_districts);
  for (int d = 0; d < plan.num_districts; ++d) results[d].district = d + 1;
  for (int32_t v = 0; v < g.size(); ++v) {
    auto& r = results[plan.assignment[v] - 1];
    r.dem_votes += votes.dem[v];
    r.rep_votes += votes.rep[v];
  }
  for (auto& r : results) {
    double total = r.dem_votes + r.rep_votes;
    if (!(total > 0))
      throw Error("district " + std::to_string(r.district) + " has zero two-party votes");
    r.dem_share = r.dem_votes / total;
    r.dem_win = r.dem_share > 0.5;
  }
  return results;
}

/// Democratic shares sorted ascending: most Republican district first.
inline std::vector<double> ranked_shares(const std::vector<DistrictResult>& results) {
  std::vector<double> shares;
  shares.reserve(results.size());
  for (const auto& r : results) shares.push_back(r.dem_share);
  std::sort(shares.begin(), shares.end());
  return shares;
}

inline int seat_count(const std::vector<DistrictResult>& results) {
  int seats = 0;
  for (const auto& r : results) seats += r.dem_win ? 1 : 0;
  return seats;
}

inline int seat_count_from_shares(std::span<const double> shares) {
  int seats = 0;
  for (double s : shares) seats += s > 0.5 ? 1 : 0;
  return seats;
}

/// Continuous seat value: the Democratic seat count plus the fractional
/// position where the line between the two marginal districts (the weakest
/// winner of each party, in Republican-share percent) crosses 50%. A sweep
/// has no opposite anchor; it returns D (Democratic) or 0 (Republican).
inline double interpolated_seats_from_shares(std::span<const double> shares) {
  int dem_seats = 0;
  double marginal_dem = 2.0;  // lowest dem share among Democratic wins
  double marginal_rep = -1.0;  // highest dem share among Republican wins
  for (double s : shares) {
    if (s > 0.5) {
      ++dem_seats;
      marginal_dem = std::min(marginal_dem, s);
    } else {
      marginal_rep = std::max(marginal_rep, s);
    }
  }
  int d = static_cast<int>(shares.size());
  if (dem_seats == d) return static_cast<double>(d);
  if (dem_seats == 0) return 0.0;
  double r_dem = 100.0 * (1.0 - marginal_dem);  // Republican percent, < 50
  double r_rep = 100.0 * (1.0 - marginal_rep);  // Republican percent, >= 50
  double f = (50.0 - r_dem) / (r_rep - r_dem);
  return dem_seats + f;
}

inline double interpolated_seats(const std::vector<DistrictResult>& results) {
  std::vector<double> shares;
  shares.reserve(results.size());
  for (const auto& r : results) shares.push_back(r.dem_share);
  return interpolated_seats_from_shares(shares);
}

}  // namespace flipchain
