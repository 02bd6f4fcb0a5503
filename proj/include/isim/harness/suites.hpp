#pragma once

#include "isim/harness/run.hpp"

namespace isim::harness {

// One agent trained across the config's seed list.
struct MethodSummary {
  AgentKind agent;
  std::vector<RunResult> runs;  // one per seed

  std::vector<double> per_seed_delta_reward() const;
  std::vector<double> per_seed_lastn(int metric) const;
  std::vector<double> per_seed_delta(int metric) const;
  std::vector<double> per_seed_lastn_reward() const;
};

// TD3/PPO/CEM trained under the same base config.
struct ComparisonReport {
  std::vector<MethodSummary> methods;
  const MethodSummary& method(AgentKind k) const;
};

ComparisonReport compare_methods(const RunConfig& base);

// Full configuration plus one-component-removed variants of the TD3 stack.
struct AblationVariant {
  std::string name;  // full, -CF, -UA, -TR, -XF, -PR
  RunConfig cfg;
  std::vector<RunResult> runs;
};

struct AblationReport {
  std::vector<AblationVariant> variants;
  const AblationVariant& variant(const std::string& name) const;
};

// full_runs, when given, are reused as the "full" variant instead of
// retraining it (they must come from the same base config).
AblationReport ablation_suite(const RunConfig& base,
                              const std::vector<RunResult>* full_runs = nullptr);

struct RobustnessReport {
  struct DropoutRow {
    double p = 0;
    DecisionQuality dq;
    double mean_reward = 0;
  };
  std::vector<DropoutRow> dropout;

  struct HoldoutRow {
    AgentKind agent;
    double delta_reward = 0;    // median across seeds of eval(final)-eval(early)
    double delta_coverage = 0;
    double delta_rapport = 0;
    double delta_pace = 0;
  };
  std::vector<HoldoutRow> holdout;
  bool holdout_ordering_stable = false;

  struct SweepRow {
    int phq_cutpoint = 0;
    int pclc_cutpoint = 0;
    double delta_td3 = 0, delta_ppo = 0, delta_cem = 0;
    bool ordered = false;  // td3 >= ppo >= cem
  };
  std::vector<SweepRow> sweep;
  bool sweep_ordering_stable = false;
};

// Stress protocols over already-trained policies: modality dropout levels,
// held-out patients, and the clinical cutpoint grid.
RobustnessReport robustness_suite(const RunConfig& base, const ComparisonReport& trained);

// Runs cells[0..n) on `jobs` worker threads; each cell writes only its own
// slot, so assembly order never matters.
void run_cells(std::vector<std::function<void()>> cells, int jobs);

}  // namespace isim::harness
