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

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "flipchain/analytics.hpp"
#include "flipchain/digest.hpp"
#include "flipchain/io.hpp"
#include "flipchain/sampler.hpp"
#include "flipchain/synth.hpp"
#include "flipchain/version.hpp"

namespace fs = std::filesystem;
using flipchain::json;

namespace {

std::string utc_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

// Removes everything written by a failed command so no partial outputs
// survive; commit() once all files are in place.
class OutputTracker {
 public:
  explicit OutputTracker(fs::path dir, bool created_dir)
      : dir_(std::move(dir)), created_dir_(created_dir) {}
  ~OutputTracker() {
    if (committed_) return;
    std::error_code ec;
    for (auto it = written_.rbegin(); it != written_.rend(); ++it) fs::remove(*it, ec);
    if (created_dir_) fs::remove(dir_, ec);  // only succeeds when empty
  }
  OutputTracker(const OutputTracker&) = delete;

  const fs::path& dir() const { return dir_; }
  fs::path track(const std::string& name) {
    fs::path p = dir_ / name;
    written_.push_back(p);
    return p;
  }
  void track_existing(const fs::path& p) { written_.push_back(p); }
  void commit() { committed_ = true; }

 private:
  fs::path dir_;
  bool created_dir_ = false;
  bool committed_ = false;
  std::vector<fs::path> written_;
};

OutputTracker make_out_dir(const std::string& out_flag, const std::string& fallback_name) {
  fs::path dir = out_flag.empty() ? fs::path(fallback_name) : fs::path(out_flag);
  bool created = !fs::exists(dir);
  fs::create_directories(dir);
  return OutputTracker(dir, created);
}

class ManifestBuilder {
 public:
  ManifestBuilder(const std::string& command, json config) {
    j_["tool"] = "flipchain";
    j_["version"] = flipchain::kVersion;
    j_["command"] = command;
    j_["started_utc"] = utc_timestamp();
    j_["config"] = std::move(config);
    j_["inputs"] = json::object();
    j_["outputs"] = json::array();
  }
  void add_input(const std::string& label, const fs::path& path) {
    j_["inputs"][label] = {{"path", path.string()}, {"sha256", flipchain::sha256_file(path.string())}};
  }
  void add_output(const fs::path& path) {
    j_["outputs"].push_back(
        {{"path", path.filename().string()}, {"sha256", flipchain::sha256_file(path.string())}});
  }
  void write(const fs::path& path) {
    j_["finished_utc"] = utc_timestamp();
    auto out = flipchain::open_output(path);
    out << j_.dump(2) << "\n";
  }

 private:
  json j_;
};

struct GraphArgs {
  std::string nodes, edges;

  void add_to(CLI::App* cmd, bool required = true) {
    auto* n = cmd->add_option("--graph-nodes", nodes, "nodes.csv path");
    auto* e = cmd->add_option("--graph-edges", edges, "edges.csv path");
    if (required) {
      n->required();
      e->required();
    }
  }
  flipchain::DistrictGraph load() const {
    auto nin = flipchain::open_input(nodes);
    auto ein = flipchain::open_input(edges);
    return flipchain::load_graph(nin, ein);
  }
};

flipchain::Plan load_plan_file(const std::string& path, const flipchain::DistrictGraph& g,
                               int districts = 0) {
  auto in = flipchain::open_input(path);
  return flipchain::load_plan_csv(in, g, districts);
}

flipchain::VoteTable load_votes_file(const std::string& path, const flipchain::DistrictGraph& g) {
  auto in = flipchain::open_input(path);
  return flipchain::load_votes_csv(in, g, fs::path(path).stem().string());
}

// ---------------- sample/neighborhood ----------------

struct SampleOptions {
  std::string config_path;
  GraphArgs graph;
  std::string plan_path;
  std::string neighborhood_path;
  int max_dev = 40;
  int64_t samples = -1;
  int64_t seed = -1;
  int chains = -1;
  int districts = -1;
  std::string compactness;
  std::string restart;
  std::string out;
  bool sidecar_plans = false;
  int64_t hot = -1, ramp = -1, cold = -1;
  double beta_hot = -1, beta_cold = -1;
};

void add_sample_options(CLI::App* cmd, SampleOptions& o, bool neighborhood_required) {
  cmd->add_option("--config", o.config_path, "JSON config; flags override its values");
  o.graph.add_to(cmd, false);
  cmd->add_option("--plan", o.plan_path, "initial plan CSV");
  auto* nb = cmd->add_option("--neighborhood", o.neighborhood_path,
                             "reference plan CSV; samples stay within --max-dev of it");
  cmd->add_option("--max-dev", o.max_dev, "max per-district symmetric difference (default 40)");
  cmd->add_option("--samples", o.samples, "number of samples to draw");
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--chains", o.chains, "independent chains (seeded seed+chain)");
  cmd->add_option("--districts", o.districts, "number of districts");
  cmd->add_option("--compactness", o.compactness, "iso | dispersion")
      ->check(CLI::IsMember({"iso", "dispersion"}));
  cmd->add_option("--restart", o.restart, "continue | restart between cycles")
      ->check(CLI::IsMember({"continue", "restart"}));
  cmd->add_option("--hot-steps", o.hot, "annealing hot steps per cycle");
  cmd->add_option("--ramp-steps", o.ramp, "annealing ramp steps per cycle");
  cmd->add_option("--cold-steps", o.cold, "annealing cold steps per cycle");
  cmd->add_option("--beta-hot", o.beta_hot, "hot inverse temperature");
  cmd->add_option("--beta-cold", o.beta_cold, "cold inverse temperature");
  cmd->add_option("--out", o.out, "output directory (default run-<time>-<seed>)");
  cmd->add_flag("--sidecar-plans", o.sidecar_plans, "plans as sidecar CSVs instead of inline");
  if (neighborhood_required) nb->required();
}

void apply_config_json(const json& cfg, SampleOptions& o, flipchain::SamplerConfig& sc,
                       bool& inline_plans) {
  auto get = [&](const char* key) { return cfg.contains(key) ? &cfg.at(key) : nullptr; };
  if (auto* v = get("graph_nodes"); v && o.graph.nodes.empty()) o.graph.nodes = v->get<std::string>();
  if (auto* v = get("graph_edges"); v && o.graph.edges.empty()) o.graph.edges = v->get<std::string>();
  if (auto* v = get("initial_plan"); v && o.plan_path.empty()) o.plan_path = v->get<std::string>();
  if (auto* v = get("num_districts")) sc.num_districts = v->get<int>();
  if (auto* v = get("target_samples")) sc.target_samples = v->get<int64_t>();
  if (auto* v = get("rng_seed")) sc.rng_seed = v->get<uint64_t>();
  if (auto* v = get("chains")) sc.chains = v->get<int>();
  if (auto* v = get("validate_every")) sc.validate_every = v->get<int64_t>();
  if (auto* v = get("compactness"))
    sc.compactness = v->get<std::string>() == "dispersion"
                         ? flipchain::Compactness::kDispersion
                         : flipchain::Compactness::kIsoperimetric;
  if (auto* v = get("restart"))
    sc.restart = v->get<std::string>() == "restart" ? flipchain::RestartMode::kRestart
                                                    : flipchain::RestartMode::kContinue;
  if (auto* v = get("inline_plans")) inline_plans = v->get<bool>();
  if (auto* v = get("weights")) {
    const json& w = *v;
    if (w.contains("w_pop")) sc.weights.w_pop = w["w_pop"].get<double>();
    if (w.contains("w_iso")) sc.weights.w_iso = w["w_iso"].get<double>();
    if (w.contains("w_county")) sc.weights.w_county = w["w_county"].get<double>();
    if (w.contains("w_minority")) sc.weights.w_minority = w["w_minority"].get<double>();
    if (w.contains("m_c")) sc.weights.m_c = w["m_c"].get<double>();
    if (w.contains("minority_target_1"))
      sc.weights.minority_target_1 = w["minority_target_1"].get<double>();
    if (w.contains("minority_target_2"))
      sc.weights.minority_target_2 = w["minority_target_2"].get<double>();
  }
  if (auto* v = get("schedule")) {
    const json& s = *v;
    if (s.contains("hot_steps")) sc.schedule.hot_steps = s["hot_steps"].get<int64_t>();
    if (s.contains("ramp_steps")) sc.schedule.ramp_steps = s["ramp_steps"].get<int64_t>();
    if (s.contains("cold_steps")) sc.schedule.cold_steps = s["cold_steps"].get<int64_t>();
    if (s.contains("beta_hot")) sc.schedule.beta_hot = s["beta_hot"].get<double>();
    if (s.contains("beta_cold")) sc.schedule.beta_cold = s["beta_cold"].get<double>();
  }
  if (auto* v = get("thresholds")) {
    const json& t = *v;
    if (t.contains("max_pop_deviation"))
      sc.thresholds.max_pop_deviation = t["max_pop_deviation"].get<double>();
    if (t.contains("max_district_iso")) {
      if (t["max_district_iso"].is_null())
        sc.thresholds.max_district_iso.reset();
      else
        sc.thresholds.max_district_iso = t["max_district_iso"].get<double>();
    }
    if (t.contains("forbid_3way_county_splits"))
      sc.thresholds.forbid_3way_county_splits = t["forbid_3way_county_splits"].get<bool>();
    if (t.contains("minority_floor_1"))
      sc.thresholds.minority_floor_1 = t["minority_floor_1"].get<double>();
    if (t.contains("minority_floor_2"))
      sc.thresholds.minority_floor_2 = t["minority_floor_2"].get<double>();
  }
  if (auto* v = get("neighborhood"); v && o.neighborhood_path.empty()) {
    o.neighborhood_path = v->at("reference_plan").get<std::string>();
    if (v->contains("max_deviation")) o.max_dev = v->at("max_deviation").get<int>();
  }
}

json sampler_config_to_json(const flipchain::SamplerConfig& sc, const SampleOptions& o,
                            bool inline_plans) {
  json j;
  j["graph_nodes"] = o.graph.nodes;
  j["graph_edges"] = o.graph.edges;
  j["initial_plan"] = o.plan_path;
  j["num_districts"] = sc.num_districts;
  j["target_samples"] = sc.target_samples;
  j["rng_seed"] = sc.rng_seed;
  j["chains"] = sc.chains;
  j["validate_every"] = sc.validate_every;
  j["compactness"] =
      sc.compactness == flipchain::Compactness::kDispersion ? "dispersion" : "iso";
  j["restart"] = sc.restart == flipchain::RestartMode::kRestart ? "restart" : "continue";
  j["inline_plans"] = inline_plans;
  j["weights"] = {{"w_pop", sc.weights.w_pop},
                  {"w_iso", sc.weights.w_iso},
                  {"w_county", sc.weights.w_county},
                  {"w_minority", sc.weights.w_minority},
                  {"m_c", sc.weights.m_c},
                  {"minority_target_1", sc.weights.minority_target_1},
                  {"minority_target_2", sc.weights.minority_target_2}};
  j["schedule"] = {{"hot_steps", sc.schedule.hot_steps},
                   {"ramp_steps", sc.schedule.ramp_steps},
                   {"cold_steps", sc.schedule.cold_steps},
                   {"beta_hot", sc.schedule.beta_hot},
                   {"beta_cold", sc.schedule.beta_cold}};
  j["thresholds"] = {
      {"max_pop_deviation", sc.thresholds.max_pop_deviation},
      {"max_district_iso",
       sc.thresholds.max_district_iso ? json(*sc.thresholds.max_district_iso) : json(nullptr)},
      {"forbid_3way_county_splits", sc.thresholds.forbid_3way_county_splits},
      {"minority_floor_1", sc.thresholds.minority_floor_1},
      {"minority_floor_2", sc.thresholds.minority_floor_2}};
  if (!o.neighborhood_path.empty()) {
    j["neighborhood"] = {{"reference_plan", o.neighborhood_path},
                         {"max_deviation", o.max_dev}};
  }
  return j;
}

int cmd_sample(SampleOptions& o, const std::string& command_name) {
  flipchain::SamplerConfig sc;
  bool inline_plans = true;
  if (!o.config_path.empty()) {
    auto in = flipchain::open_input(o.config_path);
    json cfg = json::parse(in, nullptr, false);
    if (cfg.is_discarded()) throw flipchain::InputError("bad JSON config: " + o.config_path);
    apply_config_json(cfg, o, sc, inline_plans);
  }
  // flags override config values
  if (o.samples >= 0) sc.target_samples = o.samples;
  if (o.seed >= 0) sc.rng_seed = static_cast<uint64_t>(o.seed);
  if (o.chains >= 0) sc.chains = o.chains;
  if (o.districts >= 0) sc.num_districts = o.districts;
  if (!o.compactness.empty())
    sc.compactness = o.compactness == "dispersion" ? flipchain::Compactness::kDispersion
                                                   : flipchain::Compactness::kIsoperimetric;
  if (!o.restart.empty())
    sc.restart = o.restart == "restart" ? flipchain::RestartMode::kRestart
                                        : flipchain::RestartMode::kContinue;
  if (o.hot >= 0) sc.schedule.hot_steps = o.hot;
  if (o.ramp >= 0) sc.schedule.ramp_steps = o.ramp;
  if (o.cold >= 0) sc.schedule.cold_steps = o.cold;
  if (o.beta_hot >= 0) sc.schedule.beta_hot = o.beta_hot;
  if (o.beta_cold >= 0) sc.schedule.beta_cold = o.beta_cold;
  if (o.sidecar_plans) inline_plans = false;

  if (o.graph.nodes.empty() || o.graph.edges.empty())
    throw flipchain::InputError("--graph-nodes/--graph-edges (or config) required");
  if (o.plan_path.empty()) throw flipchain::InputError("--plan (initial plan) required");

  auto g = o.graph.load();
  sc.initial_plan = load_plan_file(o.plan_path, g, sc.num_districts);
  if (sc.num_districts <= 0) sc.num_districts = sc.initial_plan.num_districts;
  if (!o.neighborhood_path.empty()) {
    flipchain::NeighborhoodConstraint nb;
    nb.reference = load_plan_file(o.neighborhood_path, g, sc.num_districts);
    nb.max_deviation = o.max_dev;
    sc.neighborhood = std::move(nb);
  }

  auto tracker = make_out_dir(o.out, "run-" + utc_timestamp() + "-" +
                                         std::to_string(sc.rng_seed));
  ManifestBuilder manifest(command_name, sampler_config_to_json(sc, o, inline_plans));
  manifest.add_input("graph_nodes", o.graph.nodes);
  manifest.add_input("graph_edges", o.graph.edges);
  manifest.add_input("initial_plan", o.plan_path);
  if (!o.neighborhood_path.empty()) manifest.add_input("neighborhood_plan", o.neighborhood_path);

  auto result = flipchain::generate_ensemble(g, sc);

  fs::path ensemble_path = tracker.track("ensemble.jsonl");
  if (!inline_plans) {
    // track individual plan files through the plans directory
    for (const auto& r : result.records) {
      tracker.track_existing(tracker.dir() / "plans" /
                             ("chain" + std::to_string(r.chain) + "_cycle" +
                              std::to_string(r.cycle) + ".csv"));
    }
  }
  flipchain::write_ensemble_jsonl(ensemble_path, result.records, g, inline_plans);
  fs::path summary_path = tracker.track("summary.json");
  {
    auto out = flipchain::open_output(summary_path);
    out << flipchain::summary_to_json(result.summary).dump(2) << "\n";
  }
  manifest.add_output(ensemble_path);
  manifest.add_output(summary_path);
  fs::path manifest_path = tracker.track("manifest.json");
  manifest.write(manifest_path);
  tracker.commit();

  std::cout << "wrote " << result.summary.samples << " samples ("
            << result.summary.passed << " pass thresholds) to " << tracker.dir().string()
            << "\n";
  return 0;
}

// ---------------- synth ----------------

struct SynthOptions {
  flipchain::SynthSpec spec;
  std::string pop_model = "uniform";
  std::string out = "synth";
  bool emit_plan = false;
};

int cmd_synth(SynthOptions& o) {
  o.spec.pop_model = o.pop_model == "urban" ? flipchain::PopulationModel::kUrbanCluster
                                            : flipchain::PopulationModel::kUniform;
  auto grid = flipchain::make_grid_state(o.spec);
  auto tracker = make_out_dir(o.out, "synth");
  json cfg{{"rows", o.spec.rows},
           {"cols", o.spec.cols},
           {"num_districts", o.spec.num_districts},
           {"pop_model", o.pop_model},
           {"base_population", o.spec.base_population},
           {"urban_peak", o.spec.urban_peak},
           {"urban_radius", o.spec.urban_radius},
           {"urban_center_row", o.spec.urban_center_row},
           {"urban_center_col", o.spec.urban_center_col},
           {"statewide_dem_share", o.spec.statewide_dem_share},
           {"urban_dem_boost", o.spec.urban_dem_boost},
           {"county_block", o.spec.county_block},
           {"minority_cluster_fraction", o.spec.minority_cluster_fraction},
           {"seed", o.spec.seed}};
  ManifestBuilder manifest("synth", cfg);

  fs::path nodes = tracker.track("nodes.csv");
  {
    auto out = flipchain::open_output(nodes);
    flipchain::write_nodes_csv(out, grid.graph);
  }
  fs::path edges = tracker.track("edges.csv");
  {
    auto out = flipchain::open_output(edges);
    flipchain::write_edges_csv(out, grid.graph);
  }
  fs::path votes = tracker.track("votes.csv");
  {
    auto out = flipchain::open_output(votes);
    flipchain::write_votes_csv(out, grid.graph, grid.votes);
  }
  manifest.add_output(nodes);
  manifest.add_output(edges);
  manifest.add_output(votes);
  if (o.emit_plan) {
    fs::path plan = tracker.track("init_plan.csv");
    auto out = flipchain::open_output(plan);
    flipchain::write_plan_csv(out, grid.graph, flipchain::banded_plan(grid.graph, o.spec));
    manifest.add_output(plan);
  }
  fs::path manifest_path = tracker.track("manifest.json");
  manifest.write(manifest_path);
  tracker.commit();
  std::cout << "wrote grid " << o.spec.rows << "x" << o.spec.cols << " to "
            << tracker.dir().string() << "\n";
  return 0;
}

// ---------------- tally ----------------

int cmd_tally(GraphArgs& graph, const std::string& plan_path, const std::string& votes_path,
              const std::string& out_dir) {
  auto g = graph.load();
  auto plan = load_plan_file(plan_path, g);
  auto votes = load_votes_file(votes_path, g);
  auto results = flipchain::tally(g, plan, votes);

  auto tracker = make_out_dir(out_dir, ".");
  ManifestBuilder manifest("tally", json{{"plan", plan_path}, {"votes", votes_path}});
  manifest.add_input("graph_nodes", graph.nodes);
  manifest.add_input("graph_edges", graph.edges);
  manifest.add_input("plan", plan_path);
  manifest.add_input("votes", votes_path);
  fs::path path = tracker.track("district_results.csv");
  {
    auto out = flipchain::open_output(path);
    out << "district,dem_votes,rep_votes,dem_share,winner\n";
    for (const auto& r : results) {
      out << r.district << ',' << flipchain::format_double(r.dem_votes) << ','
          << flipchain::format_double(r.rep_votes) << ','
          << flipchain::format_double(r.dem_share) << ',' << (r.dem_win ? "Dem" : "Rep")
          << "\n";
    }
  }
  manifest.add_output(path);
  fs::path manifest_path = tracker.track("tally_manifest.json");
  manifest.write(manifest_path);
  tracker.commit();

  std::cout << "seats (Dem): " << flipchain::seat_count(results)
            << "  interpolated: " << flipchain::interpolated_seats(results) << "\n";
  return 0;
}

// ---------------- shared ensemble analytics ----------------

struct EnsembleAnalysis {
  std::vector<std::vector<double>> ranked;                    // per passing sample
  std::vector<std::vector<flipchain::DistrictResult>> tallies;
  flipchain::EnsembleStats stats;
  std::vector<double> gi, ri, eg;
};

EnsembleAnalysis analyze_ensemble(const flipchain::DistrictGraph& g,
                                  const std::vector<flipchain::SampleRecord>& records,
                                  const flipchain::VoteTable& votes, bool include_failed) {
  EnsembleAnalysis a;
  for (const auto& r : records) {
    if (!include_failed && !r.passes) continue;
    auto results = flipchain::tally(g, r.plan, votes);
    a.ranked.push_back(flipchain::ranked_shares(results));
    a.tallies.push_back(std::move(results));
  }
  if (a.ranked.empty())
    throw flipchain::InputError("no usable samples (all rejected by thresholds)");
  a.stats = flipchain::rank_marginal_stats(a.ranked);
  auto means = a.stats.rank_means();
  for (size_t i = 0; i < a.ranked.size(); ++i) {
    a.gi.push_back(flipchain::gerrymandering_index(a.ranked[i], means));
    a.ri.push_back(flipchain::representativeness_index(a.stats.interpolated[i],
                                                       a.stats.interpolated_mean));
    a.eg.push_back(flipchain::efficiency_gap(a.tallies[i]));
  }
  return a;
}

struct AnalyticsArgs {
  GraphArgs graph;
  std::string ensemble_path;
  std::string votes_path;
  bool include_failed = false;
  std::string out;
};

void add_analytics_options(CLI::App* cmd, AnalyticsArgs& a) {
  a.graph.add_to(cmd);
  cmd->add_option("--ensemble", a.ensemble_path, "ensemble JSONL from `sample`")->required();
  cmd->add_option("--votes", a.votes_path, "votes.csv")->required();
  cmd->add_flag("--include-failed", a.include_failed,
                "use all samples, not just the thresholded ones");
  cmd->add_option("--out", a.out, "output directory (default .)");
}

int cmd_indices(AnalyticsArgs& args, const std::string& plan_path) {
  auto g = args.graph.load();
  auto records = flipchain::load_ensemble_jsonl(args.ensemble_path, g);
  auto votes = load_votes_file(args.votes_path, g);
  auto a = analyze_ensemble(g, records, votes, args.include_failed);

  auto plan = load_plan_file(plan_path, g);
  auto results = flipchain::tally(g, plan, votes);
  auto ranked = flipchain::ranked_shares(results);
  auto means = a.stats.rank_means();
  double gi = flipchain::gerrymandering_index(ranked, means);
  double interp = flipchain::interpolated_seats(results);
  double ri = flipchain::representativeness_index(interp, a.stats.interpolated_mean);
  double eg = flipchain::efficiency_gap(results);

  json j;
  j["plan"] = plan_path;
  j["votes"] = args.votes_path;
  j["ensemble_size"] = a.ranked.size();
  j["seat_count"] = flipchain::seat_count(results);
  j["interpolated_seats"] = interp;
  j["ensemble_interpolated_mean"] = a.stats.interpolated_mean;
  j["gerrymandering_index"] = gi;
  j["representativeness_index"] = ri;
  j["efficiency_gap"] = eg;
  j["rank_means"] = means;
  j["quantiles"] = {{"gerrymandering_index", flipchain::quantile_of(gi, a.gi)},
                    {"representativeness_index", flipchain::quantile_of(ri, a.ri)},
                    {"efficiency_gap", flipchain::quantile_of(eg, a.eg)}};

  auto tracker = make_out_dir(args.out, ".");
  fs::path path = tracker.track("indices.json");
  {
    auto out = flipchain::open_output(path);
    out << j.dump(2) << "\n";
  }
  tracker.commit();
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_boxplot(AnalyticsArgs& args) {
  auto g = args.graph.load();
  auto records = flipchain::load_ensemble_jsonl(args.ensemble_path, g);
  auto votes = load_votes_file(args.votes_path, g);
  auto a = analyze_ensemble(g, records, votes, args.include_failed);
  auto tracker = make_out_dir(args.out, ".");
  fs::path path = tracker.track("boxplot.csv");
  {
    auto out = flipchain::open_output(path);
    flipchain::write_boxplot_csv(out, a.stats);
  }
  tracker.commit();
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

int cmd_ccdf(AnalyticsArgs& args) {
  auto g = args.graph.load();
  auto records = flipchain::load_ensemble_jsonl(args.ensemble_path, g);
  auto votes = load_votes_file(args.votes_path, g);
  auto a = analyze_ensemble(g, records, votes, args.include_failed);
  auto tracker = make_out_dir(args.out, ".");
  auto write_one = [&](const std::string& name, const std::vector<double>& values) {
    fs::path path = tracker.track("ccdf_" + name + ".csv");
    auto out = flipchain::open_output(path);
    flipchain::write_ccdf_csv(out, flipchain::complementary_cdf(values));
  };
  write_one("gerrymandering", a.gi);
  write_one("representativeness", a.ri);
  write_one("efficiency_gap", a.eg);
  tracker.commit();
  std::cout << "wrote ccdf_{gerrymandering,representativeness,efficiency_gap}.csv\n";
  return 0;
}

int cmd_seats(AnalyticsArgs& args) {
  auto g = args.graph.load();
  auto records = flipchain::load_ensemble_jsonl(args.ensemble_path, g);
  auto votes = load_votes_file(args.votes_path, g);
  auto a = analyze_ensemble(g, records, votes, args.include_failed);
  auto tracker = make_out_dir(args.out, ".");
  fs::path hist = tracker.track("seats_hist.csv");
  {
    auto out = flipchain::open_output(hist);
    flipchain::write_seats_hist_csv(out, a.stats);
  }
  fs::path interp = tracker.track("interp_hist.csv");
  {
    auto out = flipchain::open_output(interp);
    flipchain::write_interp_hist_csv(out, a.stats);
  }
  tracker.commit();
  std::cout << "wrote " << hist.string() << " and " << interp.string() << "\n";
  return 0;
}

// ---------------- enumerate ----------------

int cmd_enumerate(GraphArgs& graph, int districts, double balance, bool has_balance,
                  double beta, const std::string& out_dir) {
  auto g = graph.load();
  std::optional<double> bal;
  if (has_balance) bal = balance;
  flipchain::ScoreWeights w;
  auto dist = flipchain::exact_distribution(g, districts, w, beta,
                                            flipchain::Compactness::kIsoperimetric, bal);

  auto tracker = make_out_dir(out_dir, ".");
  fs::path plans_path = tracker.track("plans.csv");
  {
    auto out = flipchain::open_output(plans_path);
    out << "plan_index,id,district\n";
    for (size_t i = 0; i < dist.plans.size(); ++i) {
      for (int32_t v = 0; v < g.size(); ++v) {
        out << i << ',' << g.unit(v).id << ',' << dist.plans[i].assignment[v] << "\n";
      }
    }
  }
  fs::path dist_path = tracker.track("exact_distribution.json");
  {
    json j;
    j["beta"] = dist.beta;
    j["log_z"] = dist.log_z;
    j["num_plans"] = dist.plans.size();
    json rows = json::array();
    for (size_t i = 0; i < dist.plans.size(); ++i) {
      rows.push_back({{"plan_index", i}, {"j", dist.score[i]}, {"probability", dist.probability[i]}});
    }
    j["plans"] = std::move(rows);
    auto out = flipchain::open_output(dist_path);
    out << j.dump(2) << "\n";
  }
  tracker.commit();
  std::cout << dist.plans.size() << " connected plans; log Z = " << dist.log_z << "\n";
  return 0;
}

// ---------------- tune ----------------

struct TuneOptions {
  GraphArgs graph;
  std::string plan_path;
  int districts = 0;
  int64_t probe_samples = 40;
  int64_t hot = 2000, ramp = 3000, cold = 1000;
  uint64_t seed = 1;
  double pop_dev_target = 0.005;
  double pop_frac = 0.25;
  double iso_cap = 60.0;
  double iso_frac = 0.10;
  double minority_frac = 0.50;
  double floor1 = 0.40, floor2 = 0.335;
  double county_mean_2splits = 25.0;
  std::string out;
};

struct TuneProbe {
  double pop_frac = 0, iso_frac = 0, minority_frac = 0, no3way_frac = 0;
  double mean_2splits = 0;
};

TuneProbe tune_probe(const flipchain::DistrictGraph& g, const TuneOptions& o,
                     const flipchain::ScoreWeights& w, const flipchain::Plan& init) {
  flipchain::SamplerConfig sc;
  sc.weights = w;
  sc.schedule = {o.hot, o.ramp, o.cold, 0.0, 1.0};
  sc.num_districts = init.num_districts;
  sc.target_samples = o.probe_samples;
  sc.rng_seed = o.seed;
  sc.initial_plan = init;
  auto result = flipchain::generate_ensemble(g, sc);
  double ideal = g.total_population() / init.num_districts;
  TuneProbe probe;
  for (const auto& r : result.records) {
    double worst_dev = 0, worst_iso = 0;
    double m1 = 0, m2 = 0;
    for (const auto& a : r.aggregates) {
      worst_dev = std::max(worst_dev, std::abs(a.population / ideal - 1.0));
      worst_iso = std::max(worst_iso, a.boundary_length * a.boundary_length / a.area);
      double frac = a.population > 0 ? a.minority_population / a.population : 0.0;
      if (frac > m1) {
        m2 = m1;
        m1 = frac;
      } else if (frac > m2) {
        m2 = frac;
      }
    }
    probe.pop_frac += worst_dev <= o.pop_dev_target ? 1 : 0;
    probe.iso_frac += worst_iso <= o.iso_cap ? 1 : 0;
    probe.minority_frac += (m1 >= o.floor1 && m2 >= o.floor2) ? 1 : 0;
    flipchain::PlanState st(g, r.plan);
    probe.no3way_frac += st.split3_count() == 0 ? 1 : 0;
    probe.mean_2splits += st.split2_count();
  }
  double n = static_cast<double>(result.records.size());
  probe.pop_frac /= n;
  probe.iso_frac /= n;
  probe.minority_frac /= n;
  probe.no3way_frac /= n;
  probe.mean_2splits /= n;
  return probe;
}

int cmd_tune(TuneOptions& o) {
  auto g = o.graph.load();
  auto init = load_plan_file(o.plan_path, g, o.districts);
  bool has_minority = false;
  for (const auto& u : g.units()) has_minority = has_minority || u.minority_population > 0;

  flipchain::ScoreWeights w;
  w.w_pop = w.w_iso = w.w_county = w.w_minority = 0;
  json log = json::array();
  auto note = [&](const std::string& stage, const TuneProbe& p) {
    log.push_back({{"stage", stage},
                   {"w_pop", w.w_pop},
                   {"w_iso", w.w_iso},
                   {"w_county", w.w_county},
                   {"w_minority", w.w_minority},
                   {"pop_frac", p.pop_frac},
                   {"iso_frac", p.iso_frac},
                   {"minority_frac", p.minority_frac},
                   {"no3way_frac", p.no3way_frac},
                   {"mean_2splits", p.mean_2splits}});
    std::cout << stage << ": w=(" << w.w_pop << "," << w.w_iso << "," << w.w_county << ","
              << w.w_minority << ") pop " << p.pop_frac << " iso " << p.iso_frac
              << " minority " << p.minority_frac << " no3way " << p.no3way_frac
              << " mean2 " << p.mean_2splits << "\n";
  };

  // Smallest weights meeting each target in turn, doubling from a small
  // base; earlier targets are rechecked after each later stage and the
  // responsible weight doubled again when one regresses.
  const int kMaxDoublings = 18;
  auto raise_until = [&](double& weight, double base, auto satisfied, const char* stage) {
    if (weight == 0) weight = base;
    for (int i = 0; i < kMaxDoublings; ++i) {
      TuneProbe p = tune_probe(g, o, w, init);
      note(stage, p);
      if (satisfied(p)) return true;
      weight *= 2;
    }
    return false;
  };

  bool ok = raise_until(w.w_pop, 1.0,
                        [&](const TuneProbe& p) { return p.pop_frac >= o.pop_frac; }, "pop");
  ok = raise_until(w.w_iso, 0.125,
                   [&](const TuneProbe& p) { return p.iso_frac >= o.iso_frac; }, "iso") && ok;
  for (int round = 0; round < 4; ++round) {
    TuneProbe p = tune_probe(g, o, w, init);
    if (p.pop_frac >= o.pop_frac) break;
    w.w_pop *= 2;
    note("pop-recheck", p);
  }
  if (has_minority) {
    ok = raise_until(w.w_minority, 1.0,
                     [&](const TuneProbe& p) { return p.minority_frac >= o.minority_frac; },
                     "minority") && ok;
  }
  ok = raise_until(w.w_county, 0.05,
                   [&](const TuneProbe& p) {
                     return p.no3way_frac >= 0.95 && p.mean_2splits <= o.county_mean_2splits;
                   },
                   "county") && ok;
  TuneProbe final_probe = tune_probe(g, o, w, init);
  note("final", final_probe);

  auto tracker = make_out_dir(o.out, ".");
  fs::path path = tracker.track("tuned_weights.json");
  {
    json j;
    j["weights"] = {{"w_pop", w.w_pop},
                    {"w_iso", w.w_iso},
                    {"w_county", w.w_county},
                    {"w_minority", w.w_minority},
                    {"m_c", w.m_c},
                    {"minority_target_1", w.minority_target_1},
                    {"minority_target_2", w.minority_target_2}};
    j["targets_met"] = ok;
    j["log"] = log;
    auto out = flipchain::open_output(path);
    out << j.dump(2) << "\n";
  }
  tracker.commit();
  std::cout << "wrote " << path.string() << (ok ? "" : " (targets not all met)") << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flipchain: sample district plans by MCMC and score them against ensembles"};
  app.require_subcommand(1);
  app.set_version_flag("--version", flipchain::kVersion);

  // synth
  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic grid state");
  synth_cmd->add_option("--rows", synth.spec.rows, "grid rows");
  synth_cmd->add_option("--cols", synth.spec.cols, "grid cols");
  synth_cmd->add_option("--districts", synth.spec.num_districts, "district count");
  synth_cmd->add_option("--pop-model", synth.pop_model, "uniform | urban")
      ->check(CLI::IsMember({"uniform", "urban"}));
  synth_cmd->add_option("--base-pop", synth.spec.base_population, "population per cell");
  synth_cmd->add_option("--peak", synth.spec.urban_peak, "urban center population factor");
  synth_cmd->add_option("--radius", synth.spec.urban_radius, "urban sigma in cells");
  synth_cmd->add_option("--center-row", synth.spec.urban_center_row, "urban center row");
  synth_cmd->add_option("--center-col", synth.spec.urban_center_col, "urban center col");
  synth_cmd->add_option("--dem-share", synth.spec.statewide_dem_share, "statewide dem share");
  synth_cmd->add_option("--urban-boost", synth.spec.urban_dem_boost, "dem boost at center");
  synth_cmd->add_option("--county-block", synth.spec.county_block, "county tile edge");
  synth_cmd->add_option("--minority-frac", synth.spec.minority_cluster_fraction,
                        "minority fraction at the urban center");
  synth_cmd->add_option("--seed", synth.spec.seed, "jitter seed");
  synth_cmd->add_option("--out", synth.out, "output directory");
  synth_cmd->add_flag("--emit-plan", synth.emit_plan, "also write a banded initial plan");

  // sample / neighborhood
  SampleOptions sample;
  auto* sample_cmd = app.add_subcommand("sample", "draw an ensemble of plans");
  add_sample_options(sample_cmd, sample, false);
  SampleOptions nbhd;
  auto* nbhd_cmd = app.add_subcommand(
      "neighborhood", "sample plans near a reference plan (sample with the constraint preset)");
  add_sample_options(nbhd_cmd, nbhd, true);

  // tally
  GraphArgs tally_graph;
  std::string tally_plan, tally_votes, tally_out;
  auto* tally_cmd = app.add_subcommand("tally", "re-tally an election under a plan");
  tally_graph.add_to(tally_cmd);
  tally_cmd->add_option("--plan", tally_plan, "plan CSV")->required();
  tally_cmd->add_option("--votes", tally_votes, "votes CSV")->required();
  tally_cmd->add_option("--out", tally_out, "output directory (default .)");

  // indices
  AnalyticsArgs indices_args;
  std::string indices_plan;
  auto* indices_cmd =
      app.add_subcommand("indices", "score a plan of interest against an ensemble");
  add_analytics_options(indices_cmd, indices_args);
  indices_cmd->add_option("--plan", indices_plan, "plan of interest CSV")->required();

  // boxplot / ccdf / seats
  AnalyticsArgs boxplot_args;
  auto* boxplot_cmd = app.add_subcommand("boxplot", "rank-marginal box-plot statistics CSV");
  add_analytics_options(boxplot_cmd, boxplot_args);
  AnalyticsArgs ccdf_args;
  auto* ccdf_cmd = app.add_subcommand("ccdf", "complementary CDFs of the three indices");
  add_analytics_options(ccdf_cmd, ccdf_args);
  AnalyticsArgs seats_args;
  auto* seats_cmd = app.add_subcommand("seats", "seat histograms (integer and interpolated)");
  add_analytics_options(seats_cmd, seats_args);

  // enumerate
  GraphArgs enum_graph;
  int enum_districts = 2;
  double enum_balance = 0.0, enum_beta = 1.0;
  std::string enum_out;
  auto* enum_cmd =
      app.add_subcommand("enumerate", "exhaustively enumerate connected plans (tiny graphs)");
  enum_graph.add_to(enum_cmd);
  enum_cmd->add_option("--districts", enum_districts, "district count");
  auto* bal_opt = enum_cmd->add_option("--balance", enum_balance,
                                       "max population deviation filter (fraction)");
  enum_cmd->add_option("--beta", enum_beta, "inverse temperature for the exact distribution");
  enum_cmd->add_option("--out", enum_out, "output directory (default .)");

  // tune
  TuneOptions tune;
  auto* tune_cmd = app.add_subcommand("tune", "search score weights against sampling targets");
  tune.graph.add_to(tune_cmd);
  tune_cmd->add_option("--plan", tune.plan_path, "initial plan CSV")->required();
  tune_cmd->add_option("--districts", tune.districts, "district count");
  tune_cmd->add_option("--probe-samples", tune.probe_samples, "samples per probe");
  tune_cmd->add_option("--hot-steps", tune.hot, "hot steps per cycle");
  tune_cmd->add_option("--ramp-steps", tune.ramp, "ramp steps per cycle");
  tune_cmd->add_option("--cold-steps", tune.cold, "cold steps per cycle");
  tune_cmd->add_option("--seed", tune.seed, "probe seed");
  tune_cmd->add_option("--target-pop-dev", tune.pop_dev_target, "population deviation target");
  tune_cmd->add_option("--target-pop-frac", tune.pop_frac, "fraction under the pop target");
  tune_cmd->add_option("--target-iso", tune.iso_cap, "isoperimetric cap");
  tune_cmd->add_option("--target-iso-frac", tune.iso_frac, "fraction under the iso cap");
  tune_cmd->add_option("--target-minority-frac", tune.minority_frac,
                       "fraction meeting minority floors");
  tune_cmd->add_option("--floor1", tune.floor1, "first minority floor");
  tune_cmd->add_option("--floor2", tune.floor2, "second minority floor");
  tune_cmd->add_option("--target-mean-2splits", tune.county_mean_2splits,
                       "mean two-way county splits target");
  tune_cmd->add_option("--out", tune.out, "output directory (default .)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*synth_cmd) return cmd_synth(synth);
    if (*sample_cmd) return cmd_sample(sample, "sample");
    if (*nbhd_cmd) return cmd_sample(nbhd, "neighborhood");
    if (*tally_cmd) return cmd_tally(tally_graph, tally_plan, tally_votes, tally_out);
    if (*indices_cmd) return cmd_indices(indices_args, indices_plan);
    if (*boxplot_cmd) return cmd_boxplot(boxplot_args);
    if (*ccdf_cmd) return cmd_ccdf(ccdf_args);
    if (*seats_cmd) return cmd_seats(seats_args);
    if (*enum_cmd)
      return cmd_enumerate(enum_graph, enum_districts, enum_balance, bal_opt->count() > 0,
                           enum_beta, enum_out);
    if (*tune_cmd) return cmd_tune(tune);
  } catch (const flipchain::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
