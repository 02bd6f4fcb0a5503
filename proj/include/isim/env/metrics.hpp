#pragma once

#include <array>
#include <span>
#include <vector>

#include "isim/env/action.hpp"

namespace isim::env {

inline constexpr int kMetricDim = 10;
inline constexpr int kStateDim = 20;
inline constexpr int kActionDim = 5;

// The per-turn metric vector; every component is normalized to [0,1] with
// higher meaning better.
struct MetricVector {
  double coverage = 0;
  double rapport = 0;
  double balance = 0;
  double pace = 0;
  double wasted_wait_score = 0;
  double latency_score = 0;
  double overlap_score = 0;
  double clarify_score = 0;
  double cut_consistency = 0;
  double bc_precision = 0;

  std::array<double, kMetricDim> to_array() const {
    return {coverage,      rapport,       balance,       pace,
            wasted_wait_score, latency_score, overlap_score, clarify_score,
            cut_consistency,   bc_precision};
  }
};

// Component order used everywhere a metric vector is flattened.
extern const std::array<const char*, kMetricDim> kMetricNames;

// Preference weights over the metric vector plus the legacy reward
// coefficients (alpha, gamma, rho).
struct RewardWeights {
  std::array<double, kMetricDim> w{0.1, 0.1, 0.1, 0.1, 0.1,
                                   0.1, 0.1, 0.1, 0.1, 0.1};
  double alpha = 1.0;
  double gamma_sens = 1.0;
  double rho = 1.0;

  // Throws config_error unless w >= 0 and sums to 1 (1e-6 tolerance).
  void validate() const;
};

double scalarize(const RewardWeights& weights, const MetricVector& m);

// End-of-episode shaping term: alpha*dAcc + gamma*sens + rho*rapport.
double legacy_reward(double delta_acc, double sensitivity, double rapport,
                     const RewardWeights& weights);

// Everything compute_metrics needs to know about one completed turn.
struct TurnTrace {
  int turn = 0;            // 0-based turn index
  int delivered = 0;       // items delivered so far, including this turn
  double a1 = 17.0;        // action timing fields used by the composites
  double a2 = 6.0;
  double latency = 0.0;    // applied cut minus patient end (signed)
  double overlap = 0.0;    // double-talk time, 0 for clean cuts
  bool clean_cut = true;   // landed at a pause, tail window, or after the end
  bool skipped = false;    // timeout fallback; the item was not delivered
  int unnecessary_clarifies = 0;
  int bc_total = 0;
  int bc_inside = 0;
  std::array<int, 4> topic_counts{};  // PHQ, B, C, D
};

MetricVector compute_metrics(const TurnTrace& trace, const ActionBounds& bounds);

// Argmax with lowest-index tie-break over per-item probe uncertainties.
// Returns -1 when every entry is zero (nothing eligible).
int select_probe_target(std::span<const double> uncertainties);

}  // namespace isim::env
