#pragma once

#include <optional>

#include "isim/agents/checkpoint.hpp"
#include "isim/env/episode_log.hpp"
#include "isim/harness/config.hpp"
#include "isim/harness/series.hpp"

namespace isim::harness {

// Per-episode aggregates; the unit entry of every learning curve.
struct EpisodeStats {
  double reward = 0;                       // mean per-turn reward
  std::array<double, env::kMetricDim> metrics{};  // per-turn means
  double wait_raw = 0;                     // mean silence past patient end
  double overlap_raw = 0;                  // mean double-talk time
  double unnecessary_clarify_rate = 0;     // fraction of turns
  double clean_cut_rate = 1;               // fraction of turns
  double bc_precision = 1;                 // 1 when no backchannels occurred
  double delivered = 0;                    // items captured (max 25)
  double legacy = 0;                       // end-of-episode shaping value
  double dep_correct = 0;
  double ptsd_correct = 0;
};

struct CemIterationStats {
  int iteration = 0;
  double best_return = 0;
  double elite_mean_return = 0;
  double population_mean_return = 0;
  double deployed_mean_return = 0;  // refit mean scored on fresh episodes
};

struct RunResult {
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<EpisodeStats> episodes;  // length == config.episodes
  agents::Checkpoint early;   // policy after the first rolling window
  agents::Checkpoint final;   // policy at the end of training
  std::vector<env::TurnRecord> sampled_turns;
  std::vector<env::AuditLine> audit_lines;
  std::vector<CemIterationStats> cem_iterations;  // CEM runs only
};

// Column extraction for the series helpers: reward or one metric index.
std::vector<double> reward_series(const std::vector<EpisodeStats>& eps);
std::vector<double> metric_series(const std::vector<EpisodeStats>& eps, int metric);

// One full training run over the training split of the cohort;
// deterministic given (config, seed).
RunResult train_run(const RunConfig& cfg, std::uint64_t seed);

// Deterministic evaluation of a checkpointed policy over a cohort (no
// exploration, no learning).
std::vector<EpisodeStats> evaluate_policy(const RunConfig& cfg,
                                          const agents::Checkpoint& ck,
                                          const cohort::Cohort& patients,
                                          int episodes, std::uint64_t seed,
                                          const env::EnvConfig& env_cfg);

// Table-4 style LastN means of the raw decision-quality endpoints; times
// are converted to seconds.
struct DecisionQuality {
  double wait_s = 0;
  double overlap_s = 0;
  double clarify_pct = 0;
  double cut_consistency_pct = 0;
  double bc_precision_pct = 0;
};
DecisionQuality decision_quality(const std::vector<EpisodeStats>& eps,
                                 int lastn = kLastN);

}  // namespace isim::harness
