#include "isim/env/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace isim::env {

const std::array<const char*, kMetricDim> kMetricNames = {
    "coverage",      "rapport",       "balance",       "pace",
    "wasted_wait",   "latency",       "overlap",       "clarify",
    "cut_consistency", "bc_precision"};

Action clamp_action(const Action& a, const ActionBounds& b) {
  const auto v = a.to_array();
  std::array<double, 5> out{};
  for (int i = 0; i < 5; ++i) {
    if (!std::isfinite(v[i])) throw numeric_error("action: non-finite component");
    out[i] = std::clamp(v[i], b.lower[i], b.upper[i]);
  }
  return Action::from_array(out);
}

Action midpoint_action(const ActionBounds& b) {
  std::array<double, 5> mid{};
  for (int i = 0; i < 5; ++i) mid[i] = 0.5 * (b.lower[i] + b.upper[i]);
  return Action::from_array(mid);
}

void RewardWeights::validate() const {
  double sum = 0;
  for (double v : w) {
    if (v < 0) throw config_error("reward weights must be non-negative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw config_error("reward weights must sum to 1");
  if (alpha < 0 || gamma_sens < 0 || rho < 0)
    throw config_error("legacy reward coefficients must be non-negative");
}

double scalarize(const RewardWeights& weights, const MetricVector& m) {
  const auto mv = m.to_array();
  double r = 0;
  for (int i = 0; i < kMetricDim; ++i) r += weights.w[i] * mv[i];
  return r;
}

double legacy_reward(double delta_acc, double sensitivity, double rapport,
                     const RewardWeights& weights) {
  return weights.alpha * delta_acc + weights.gamma_sens * sensitivity +
         weights.rho * rapport;
}

namespace {

constexpr double kLatencyScale = 5.0;  // time units, latency composite decay
constexpr double kOverlapScale = 2.0;  // time units, overlap composite decay

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

MetricVector compute_metrics(const TurnTrace& t, const ActionBounds& bounds) {
  MetricVector m;
  m.coverage = clamp01(t.delivered / 25.0);

  if (t.skipped) {
    // The patient disengaged before the agent took the floor: no cut was
    // made (consistent, zero overlap) but the timing composites score 0.
    m.latency_score = 0.0;
    m.pace = 0.0;
    m.wasted_wait_score = 0.0;
    m.overlap_score = 1.0;
    m.cut_consistency = 1.0;
  } else {
    m.latency_score = std::exp(-std::abs(t.latency - t.a1) / kLatencyScale);
    m.overlap_score = t.overlap <= 0 ? 1.0 : std::exp(-t.overlap / kOverlapScale);
    m.wasted_wait_score =
        1.0 - std::min(1.0, std::max(0.0, t.latency) / std::max(t.a2, 1e-9));
    m.pace = clamp01(1.0 - std::abs(t.latency - t.a1) / bounds.range(0));
    m.cut_consistency = t.clean_cut ? 1.0 : 0.0;
  }

  m.rapport = 0.5 * (m.latency_score + m.overlap_score);
  m.clarify_score = 1.0 - std::min(1, t.unnecessary_clarifies);
  m.bc_precision =
      t.bc_total == 0 ? 1.0 : static_cast<double>(t.bc_inside) / t.bc_total;

  int total = 0;
  for (int c : t.topic_counts) total += c;
  if (total > 0) {
    double h = 0;
    for (int c : t.topic_counts) {
      if (c == 0) continue;
      const double p = static_cast<double>(c) / total;
      h -= p * std::log(p);
    }
    m.balance = clamp01(h / std::log(4.0));
  }
  return m;
}

int select_probe_target(std::span<const double> uncertainties) {
  int best = -1;
  double best_u = 0.0;
  for (int i = 0; i < static_cast<int>(uncertainties.size()); ++i) {
    if (uncertainties[i] > best_u) {
      best_u = uncertainties[i];
      best = i;
    }
  }
  return best;
}

}  // namespace isim::env
