#pragma once

#include <string>

#include "isim/harness/suites.hpp"

namespace isim::harness {

void ensure_dir(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Per-run artifacts: config snapshot, learning curves, decision-quality
// series, sampled episode/audit logs, checkpoints.
void write_run_dir(const std::string& dir, const RunConfig& cfg, const RunResult& run);

std::string curves_csv(const RunResult& run);
std::string decision_csv(const RunResult& run);
std::string cem_iterations_csv(const RunResult& run);

// Method-comparison table: per policy, LastN value and first-to-last delta
// for reward and the four core metrics (medians across seeds).
std::string comparison_csv(const ComparisonReport& report);

// Per-variant LastN means, deltas and across-seed spread.
std::string ablation_csv(const AblationReport& report);

std::string robustness_csv(const RobustnessReport& report);

}  // namespace isim::harness
