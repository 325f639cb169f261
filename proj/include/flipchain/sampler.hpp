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

#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "flipchain/rng.hpp"
#include "flipchain/scores.hpp"

namespace flipchain {

/// Simulated-annealing temperature plan for one sample: hold beta_hot, ramp
/// linearly to beta_cold, hold beta_cold, then emit.
struct AnnealingSchedule {
  int64_t hot_steps = 40000;
  int64_t ramp_steps = 60000;
  int64_t cold_steps = 20000;
  double beta_hot = 0.0;
  double beta_cold = 1.0;

  int64_t total_steps() const { return hot_steps + ramp_steps + cold_steps; }
  double beta_at(int64_t step) const {
    if (step < hot_steps) return beta_hot;
    if (step < hot_steps + ramp_steps) {
      int64_t t = step - hot_steps;
      return beta_hot + (beta_cold - beta_hot) * static_cast<double>(t + 1) /
                            static_cast<double>(ramp_steps);
    }
    return beta_cold;
  }
};

/// Post-hoc sample filter. A sample passes when every district meets the
/// population-deviation bound, every district's isoperimetric ratio is under
/// the cap (when set), no county touches three or more districts (when the
/// flag is on), and the two most-minority districts clear the floors.
struct ThresholdConfig {
  double max_pop_deviation = 0.01;
  std::optional<double> max_district_iso = 60.0;
  bool forbid_3way_county_splits = true;
  double minority_floor_1 = 0.40;
  double minority_floor_2 = 0.335;
};

enum class ThresholdFailure {
  kPopulationDeviation,
  kIsoperimetricRatio,
  kCountySplit3Way,
  kMinorityFloor,
};

inline const char* to_string(ThresholdFailure f) {
  switch (f) {
    case ThresholdFailure::kPopulationDeviation: return "PopulationDeviation";
    case ThresholdFailure::kIsoperimetricRatio: return "IsoperimetricRatio";
    case ThresholdFailure::kCountySplit3Way: return "CountySplit3Way";
    case ThresholdFailure::kMinorityFloor: return "MinorityFloor";
  }
  return "?";
}

struct NeighborhoodConstraint {
  Plan reference;
  int max_deviation = 40;
};

enum class RestartMode { kContinue, kRestart };

struct SamplerConfig {
  ScoreWeights weights;
  AnnealingSchedule schedule;
  ThresholdConfig thresholds;
  int num_districts = 13;
  int64_t target_samples = 1;
  uint64_t rng_seed = 0;
  int chains = 1;
  std::optional<NeighborhoodConstraint> neighborhood;
  Plan initial_plan;
  Compactness compactness = Compactness::kIsoperimetric;
  RestartMode restart = RestartMode::kContinue;
  int64_t validate_every = 0;  // 0 = off; full state recheck every N steps
};

struct SampleRecord {
  int32_t chain = 0;
  int64_t cycle = 0;
  uint64_t chain_seed = 0;
  Plan plan;
  ScoreBreakdown scores;
  std::vector<DistrictAggregate> aggregates;  // index d-1 holds district d
  bool passes = false;
  std::vector<ThresholdFailure> failures;
};

struct ProposedFlip {
  int32_t vtd = -1;
  int32_t from_label = 0;
  int32_t to_label = 0;
  int32_t edge = -1;
};

/// Conflicted-edge proposal: a uniform conflicted edge, then one endpoint
/// relabeled into the other's district with probability one half each, so
/// Q(x,x') = 1/(2*conflicted(x)).
inline ProposedFlip propose(const PlanState& state, SplitMix64& rng) {
  int32_t c = state.conflicted_count();
  if (c == 0) throw PreconditionError("NoConflictedEdges: single-district state cannot move");
  int32_t e = state.conflicted_edges()[static_cast<size_t>(rng.next_below(c))];
  const auto& edge = state.graph().edges()[e];
  bool flip_a = rng.next_bool();
  int32_t v = flip_a ? edge.a : edge.b;
  int32_t other = flip_a ? edge.b : edge.a;
  return ProposedFlip{v, state.label_of(v), state.label_of(other), e};
}

namespace detail {

// Rejections that mean J(x') = infinity: an emptied or disconnected donor
// district, or breaching the neighborhood deviation cap.
inline bool flip_is_rejectable(const PlanState& state, const ProposedFlip& flip,
                               const int* max_deviation) {
  if (state.aggregate(flip.from_label).vtd_count <= 1) return true;
  if (max_deviation != nullptr &&
      state.deviation_after_flip(flip.vtd, flip.to_label) > *max_deviation)
    return true;
  return !state.flip_keeps_donor_connected(flip.vtd);
}

// Proposal multiplicity: a flip of v into district d can be proposed through
// any of v's conflicted edges into d, so the forward proposal probability is
// m_to/(2*conflicted) and the reverse one m_from/(2*conflicted'). The
// acceptance ratio must carry m_from/m_to or the stationary distribution
// drifts off exp(-beta*J)/Z; on a 3x4 grid the drift is ~0.19 in total
// variation. m_from >= 1 whenever the donor stays connected.
inline std::pair<int, int> proposal_multiplicities(const PlanState& state,
                                                   const ProposedFlip& flip) {
  int m_from = 0, m_to = 0;
  for (const auto& he : state.graph().neighbors(flip.vtd)) {
    int32_t l = state.label_of(he.to);
    m_from += l == flip.from_label ? 1 : 0;
    m_to += l == flip.to_label ? 1 : 0;
  }
  return {m_from, m_to};
}

}  // namespace detail

/// min(1, (conflicted(x)*m_from)/(conflicted(x')*m_to) * exp(-beta*dJ)), or 0
/// when the move is rejected outright. Leaves the state unchanged.
inline double acceptance_probability(PlanState& state, const ProposedFlip& flip, double beta,
                                     const ScoreWeights& w,
                                     Compactness kind = Compactness::kIsoperimetric,
                                     const int* max_deviation = nullptr) {
  if (detail::flip_is_rejectable(state, flip, max_deviation)) return 0.0;
  auto [m_from, m_to] = detail::proposal_multiplicities(state, flip);
  double c_before = state.conflicted_count();
  double j_before = total_score(state, w, kind).j_total;
  FlipDelta delta;
  state.apply_flip(flip.vtd, flip.to_label, delta);
  double j_after = total_score(state, w, kind).j_total;
  double c_after = state.conflicted_count();
  state.revert(delta);
  double log_p = std::log((c_before * m_from) / (c_after * static_cast<double>(m_to))) -
                 beta * (j_after - j_before);
  return log_p >= 0 ? 1.0 : std::exp(log_p);
}

/// One Metropolis-Hastings step. Draws exactly three random values per call
/// (edge, direction, acceptance) so streams are easy to reason about.
/// Returns whether the flip was applied. Scores run on the incremental path.
inline bool mh_step(PlanState& state, double beta, const ScoreWeights& w, SplitMix64& rng,
                    Compactness kind = Compactness::kIsoperimetric,
                    const int* max_deviation = nullptr, FlipDelta* scratch = nullptr) {
  ProposedFlip flip = propose(state, rng);
  double u = rng.next_double();
  if (detail::flip_is_rejectable(state, flip, max_deviation)) return false;

  auto [m_from, m_to] = detail::proposal_multiplicities(state, flip);
  double c_before = state.conflicted_count();
  double j_before = total_score(state, w, kind).j_total;
  FlipDelta local;
  FlipDelta& delta = scratch ? *scratch : local;
  state.apply_flip(flip.vtd, flip.to_label, delta);
  double j_after = total_score(state, w, kind).j_total;
  double c_after = state.conflicted_count();
  double log_p = std::log((c_before * m_from) / (c_after * static_cast<double>(m_to))) -
                 beta * (j_after - j_before);
  if (log_p >= 0 || u < std::exp(log_p)) return true;
  state.revert(delta);
  return false;
}

/// Evaluates the post-hoc thresholds for a sample, independently of the
/// chain's caches: county intersections are recounted from the plan.
inline std::pair<bool, std::vector<ThresholdFailure>> passes_thresholds(
    const DistrictGraph& g, const SampleRecord& record, const ThresholdConfig& t) {
  std::vector<ThresholdFailure> failures;
  int d_count = record.plan.num_districts;
  double ideal = g.total_population() / d_count;

  bool pop_ok = true, iso_ok = true;
  for (const auto& a : record.aggregates) {
    if (std::abs(a.population / ideal - 1.0) > t.max_pop_deviation) pop_ok = false;
    if (t.max_district_iso &&
        a.boundary_length * a.boundary_length / a.area > *t.max_district_iso)
      iso_ok = false;
  }
  if (!pop_ok) failures.push_back(ThresholdFailure::kPopulationDeviation);
  if (!iso_ok) failures.push_back(ThresholdFailure::kIsoperimetricRatio);

  if (t.forbid_3way_county_splits) {
    std::vector<uint8_t> seen(static_cast<size_t>(g.num_counties()) * d_count, 0);
    std::vector<int32_t> ways(g.num_counties(), 0);
    bool bad = false;
    for (int32_t v = 0; v < g.size() && !bad; ++v) {
      int32_t c = g.county_of(v);
      size_t idx = static_cast<size_t>(c) * d_count + record.plan.assignment[v] - 1;
      if (!seen[idx]) {
        seen[idx] = 1;
        if (++ways[c] >= 3) bad = true;
      }
    }
    if (bad) failures.push_back(ThresholdFailure::kCountySplit3Way);
  }

  double m1 = 0, m2 = 0;
  for (const auto& a : record.aggregates) {
    double frac = a.population > 0 ? a.minority_population / a.population : 0.0;
    if (frac > m1) {
      m2 = m1;
      m1 = frac;
    } else if (frac > m2) {
      m2 = frac;
    }
  }
  if (m1 < t.minority_floor_1 || m2 < t.minority_floor_2)
    failures.push_back(ThresholdFailure::kMinorityFloor);

  return {failures.empty(), failures};
}

namespace detail {

struct ChainCounters {
  int64_t steps = 0;
  int64_t accepted = 0;
};

inline void full_recheck(const PlanState& state, const SamplerConfig& cfg) {
  state.check_consistency();
  for (int d = 1; d <= state.num_districts(); ++d) {
    if (state.aggregate(d).vtd_count == 0)
      throw Error("chain invariant broken: empty district " + std::to_string(d));
    if (!state.is_contiguous(d))
      throw Error("chain invariant broken: district " + std::to_string(d) + " disconnected");
  }
  if (cfg.neighborhood && state.has_reference() &&
      state.max_deviation_now() > cfg.neighborhood->max_deviation)
    throw Error("chain invariant broken: neighborhood deviation exceeded");
}

}  // namespace detail

/// One annealing cycle: hot, ramp, cold, then the current plan becomes the
/// sample. The state persists, so the next cycle re-heats from this plan.
inline SampleRecord run_annealing_cycle(PlanState& state, const SamplerConfig& cfg,
                                        SplitMix64& rng, int32_t chain, int64_t cycle,
                                        detail::ChainCounters* counters = nullptr,
                                        FlipDelta* scratch = nullptr) {
  const int* max_dev =
      cfg.neighborhood ? &cfg.neighborhood->max_deviation : nullptr;
  int64_t total = cfg.schedule.total_steps();
  detail::ChainCounters local;
  detail::ChainCounters& ctr = counters ? *counters : local;
  for (int64_t step = 0; step < total; ++step) {
    double beta = cfg.schedule.beta_at(step);
    bool acc = mh_step(state, beta, cfg.weights, rng, cfg.compactness, max_dev, scratch);
    ctr.steps++;
    ctr.accepted += acc ? 1 : 0;
    if (cfg.validate_every > 0 && ctr.steps % cfg.validate_every == 0)
      detail::full_recheck(state, cfg);
  }
  SampleRecord record;
  record.chain = chain;
  record.cycle = cycle;
  record.chain_seed = cfg.rng_seed + static_cast<uint64_t>(chain);
  record.plan = state.plan();
  record.scores = total_score(state, cfg.weights, cfg.compactness);
  record.aggregates.reserve(state.num_districts());
  for (int d = 1; d <= state.num_districts(); ++d)
    record.aggregates.push_back(state.aggregate(d));
  auto [ok, failures] = passes_thresholds(state.graph(), record, cfg.thresholds);
  record.passes = ok;
  record.failures = std::move(failures);
  return record;
}

struct RunSummary {
  int64_t samples = 0;
  int64_t passed = 0;
  double threshold_pass_fraction = 0;
  int64_t steps = 0;
  int64_t accepted = 0;
  double proposal_acceptance_rate = 0;
  int chains = 0;
  uint64_t rng_seed = 0;
  double seconds = 0;
};

struct EnsembleResult {
  std::vector<SampleRecord> records;  // ordered by (chain, cycle)
  RunSummary summary;
};

/// Runs cfg.chains independent chains with seeds rng_seed + chain id and
/// merges their samples in canonical (chain, cycle) order. Output depends
/// only on (seed, per-chain quota), never on thread scheduling. Chain i
/// draws target_samples/chains samples, the remainder spread from chain 0.
inline EnsembleResult generate_ensemble(const DistrictGraph& g, const SamplerConfig& cfg) {
  if (cfg.target_samples < 1) throw InputError("target_samples must be >= 1");
  if (cfg.chains < 1) throw InputError("chains must be >= 1");
  if (cfg.schedule.hot_steps < 0 || cfg.schedule.ramp_steps < 0 || cfg.schedule.cold_steps < 0)
    throw InputError("schedule step counts must be >= 0");
  if (cfg.schedule.beta_hot < 0 || cfg.schedule.beta_cold < cfg.schedule.beta_hot)
    throw InputError("need beta_cold >= beta_hot >= 0");

  auto started = std::chrono::steady_clock::now();
  int chains = cfg.chains;
  std::vector<std::vector<SampleRecord>> per_chain(chains);
  std::vector<detail::ChainCounters> counters(chains);
  std::vector<std::exception_ptr> errors(chains);

  auto run_chain = [&](int chain) {
    try {
      int64_t quota = cfg.target_samples / chains +
                      (chain < cfg.target_samples % chains ? 1 : 0);
      if (quota == 0) return;
      SplitMix64 rng(cfg.rng_seed + static_cast<uint64_t>(chain));
      PlanState state(g, cfg.initial_plan);
      if (cfg.compactness == Compactness::kDispersion) state.enable_bbox_tracking();
      if (cfg.neighborhood) state.set_reference(cfg.neighborhood->reference);
      FlipDelta scratch;
      per_chain[chain].reserve(quota);
      for (int64_t cycle = 0; cycle < quota; ++cycle) {
        if (cfg.restart == RestartMode::kRestart && cycle > 0) {
          state = PlanState(g, cfg.initial_plan);
          if (cfg.compactness == Compactness::kDispersion) state.enable_bbox_tracking();
          if (cfg.neighborhood) state.set_reference(cfg.neighborhood->reference);
        }
        per_chain[chain].push_back(
            run_annealing_cycle(state, cfg, rng, chain, cycle, &counters[chain], &scratch));
      }
    } catch (...) {
      errors[chain] = std::current_exception();
    }
  };

  if (chains == 1) {
    run_chain(0);
  } else {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    for (int base = 0; base < chains; base += static_cast<int>(hw)) {
      std::vector<std::thread> workers;
      for (int c = base; c < std::min(chains, base + static_cast<int>(hw)); ++c)
        workers.emplace_back(run_chain, c);
      for (auto& t : workers) t.join();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  EnsembleResult result;
  result.summary.chains = chains;
  result.summary.rng_seed = cfg.rng_seed;
  for (int c = 0; c < chains; ++c) {
    result.summary.steps += counters[c].steps;
    result.summary.accepted += counters[c].accepted;
    for (auto& r : per_chain[c]) {
      result.summary.samples++;
      result.summary.passed += r.passes ? 1 : 0;
      result.records.push_back(std::move(r));
    }
  }
  result.summary.threshold_pass_fraction =
      result.summary.samples > 0
          ? static_cast<double>(result.summary.passed) / result.summary.samples
          : 0.0;
  result.summary.proposal_acceptance_rate =
      result.summary.steps > 0
          ? static_cast<double>(result.summary.accepted) / result.summary.steps
          : 0.0;
  result.summary.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace flipchain
