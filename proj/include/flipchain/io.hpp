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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "flipchain/analytics.hpp"
#include "flipchain/sampler.hpp"

namespace flipchain {

using nlohmann::json;

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open input file: " + path.string());
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open output file: " + path.string());
  return out;
}

// --- ensemble records (JSON lines, one sample per line) ---

inline json record_to_json(const SampleRecord& r, const DistrictGraph& g, bool inline_plan,
                           const std::string& plan_ref = "") {
  json j;
  j["chain"] = r.chain;
  j["cycle"] = r.cycle;
  j["seed"] = r.chain_seed;
  j["pass"] = r.passes;
  json fails = json::array();
  for (auto f : r.failures) fails.push_back(to_string(f));
  j["failures"] = std::move(fails);
  j["scores"] = {{"jp", r.scores.j_pop},
                 {"ji", r.scores.j_iso},
                 {"jc", r.scores.j_county},
                 {"jm", r.scores.j_minority},
                 {"jtotal", r.scores.j_total}};
  json districts = json::array();
  for (size_t i = 0; i < r.aggregates.size(); ++i) {
    const auto& a = r.aggregates[i];
    districts.push_back({{"district", static_cast<int>(i) + 1},
                         {"population", a.population},
                         {"area", a.area},
                         {"minority_population", a.minority_population},
                         {"boundary_length", a.boundary_length},
                         {"vtd_count", a.vtd_count}});
  }
  j["districts"] = std::move(districts);
  if (inline_plan) {
    json plan = json::object();
    for (int32_t v = 0; v < g.size(); ++v) plan[g.unit(v).id] = r.plan.assignment[v];
    j["plan"] = std::move(plan);
  } else {
    j["plan_file"] = plan_ref;
  }
  j["districts_count"] = r.plan.num_districts;
  return j;
}

inline SampleRecord record_from_json(const json& j, const DistrictGraph& g,
                                     const std::filesystem::path& base_dir) {
  SampleRecord r;
  r.chain = j.at("chain").get<int32_t>();
  r.cycle = j.at("cycle").get<int64_t>();
  r.chain_seed = j.at("seed").get<uint64_t>();
  r.passes = j.at("pass").get<bool>();
  r.plan.num_districts = j.at("districts_count").get<int>();
  r.plan.assignment.assign(g.size(), 0);
  if (j.contains("plan")) {
    for (auto it = j.at("plan").begin(); it != j.at("plan").end(); ++it) {
      r.plan.assignment[g.index_of(it.key())] = it.value().get<int32_t>();
    }
  } else {
    auto path = base_dir / j.at("plan_file").get<std::string>();
    auto in = open_input(path);
    Plan p = load_plan_csv(in, g, r.plan.num_districts);
    r.plan.assignment = std::move(p.assignment);
  }
  for (int32_t v = 0; v < g.size(); ++v) {
    if (r.plan.assignment[v] == 0)
      throw InputError("ensemble record " + std::to_string(r.cycle) + " misses unit `" +
                       g.unit(v).id + "`");
  }
  const auto& s = j.at("scores");
  r.scores.j_pop = s.at("jp").get<double>();
  r.scores.j_iso = s.at("ji").get<double>();
  r.scores.j_county = s.at("jc").get<double>();
  r.scores.j_minority = s.at("jm").get<double>();
  r.scores.j_total = s.at("jtotal").get<double>();
  for (const auto& dj : j.at("districts")) {
    DistrictAggregate a;
    a.population = dj.at("population").get<double>();
    a.area = dj.at("area").get<double>();
    a.minority_population = dj.at("minority_population").get<double>();
    a.boundary_length = dj.at("boundary_length").get<double>();
    a.vtd_count = dj.at("vtd_count").get<int32_t>();
    r.aggregates.push_back(a);
  }
  return r;
}

/// Writes one record per line. With inline_plans=false each plan goes to
/// `plans/chain<c>_cycle<k>.csv` next to the ensemble file.
inline void write_ensemble_jsonl(const std::filesystem::path& path,
                                 const std::vector<SampleRecord>& records,
                                 const DistrictGraph& g, bool inline_plans = true) {
  auto out = open_output(path);
  std::filesystem::path plans_dir = path.parent_path() / "plans";
  if (!inline_plans) std::filesystem::create_directories(plans_dir);
  for (const auto& r : records) {
    std::string ref;
    if (!inline_plans) {
      ref = "plans/chain" + std::to_string(r.chain) + "_cycle" + std::to_string(r.cycle) +
            ".csv";
      auto pout = open_output(path.parent_path() / ref);
      write_plan_csv(pout, g, r.plan);
    }
    out << record_to_json(r, g, inline_plans, ref).dump() << "\n";
  }
}

inline std::vector<SampleRecord> load_ensemble_jsonl(const std::filesystem::path& path,
                                                     const DistrictGraph& g) {
  auto in = open_input(path);
  std::vector<SampleRecord> records;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": bad JSON");
    records.push_back(record_from_json(j, g, path.parent_path()));
  }
  if (records.empty()) throw InputError(path.string() + ": empty ensemble");
  return records;
}

inline json summary_to_json(const RunSummary& s) {
  return json{{"samples", s.samples},
              {"passed_thresholds", s.passed},
              {"threshold_pass_fraction", s.threshold_pass_fraction},
              {"steps", s.steps},
              {"accepted_steps", s.accepted},
              {"proposal_acceptance_rate", s.proposal_acceptance_rate},
              {"chains", s.chains},
              {"rng_seed", s.rng_seed},
              {"seconds", s.seconds}};
}

// --- analytics exports ---

inline void write_boxplot_csv(std::ostream& out, const EnsembleStats& stats) {
  out << "rank,mean,median,q1,q3,lo,hi\n";
  for (size_t r = 0; r < stats.per_rank.size(); ++r) {
    const auto& s = stats.per_rank[r];
    out << (r + 1) << ',' << format_double(s.mean) << ',' << format_double(s.median) << ','
        << format_double(s.q1) << ',' << format_double(s.q3) << ',' << format_double(s.lo)
        << ',' << format_double(s.hi) << "\n";
  }
}

inline void write_ccdf_csv(std::ostream& out, const std::vector<std::pair<double, double>>& ccdf) {
  out << "value,fraction_greater\n";
  for (const auto& [x, f] : ccdf) out << format_double(x) << ',' << format_double(f) << "\n";
}

inline void write_seats_hist_csv(std::ostream& out, const EnsembleStats& stats) {
  out << "seats,count\n";
  for (const auto& [seats, count] : stats.seat_histogram) out << seats << ',' << count << "\n";
}

/// Interpolated-seat histogram with fixed-width bins (default 0.1).
inline void write_interp_hist_csv(std::ostream& out, const EnsembleStats& stats,
                                  double bin_width = 0.1) {
  std::map<long, long> bins;
  for (double v : stats.interpolated) bins[static_cast<long>(std::floor(v / bin_width))]++;
  out << "bin_low,count\n";
  for (const auto& [b, count] : bins)
    out << format_double(b * bin_width) << ',' << count << "\n";
}

}  // namespace flipchain
