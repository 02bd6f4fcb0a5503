#include "isim/agents/cem.hpp"

#include <algorithm>
#include <cmath>

#include "isim/errors.hpp"

namespace isim::agents {

using env::Action;
using env::ActionBounds;
using env::kActionDim;

CemState cem_init(const ActionBounds& bounds, const CemConfig& cfg) {
  CemState s;
  for (int d = 0; d < kActionDim; ++d) {
    s.mean[d] = 0.5 * (bounds.lower[d] + bounds.upper[d]);
    const double sd = cfg.init_std_frac * bounds.range(d);
    s.var[d] = sd * sd;
  }
  return s;
}

CemIterationResult cem_iterate(
    const CemState& state,
    const std::function<double(const Action&, int)>& evaluate,
    const ActionBounds& bounds, const CemConfig& cfg, num::Rng& rng) {
  const int n = cfg.population;
  const int elites = static_cast<int>(std::lround(cfg.elite_frac * n));
  if (n < 1 || elites < 1 || elites > n)
    throw config_error("cem: elite count out of range");

  CemIterationResult out;
  out.candidates.resize(n);
  out.returns.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < kActionDim; ++d) {
      const double v = state.mean[d] + std::sqrt(state.var[d]) * rng.normal();
      out.candidates[i][d] = std::clamp(v, bounds.lower[d], bounds.upper[d]);
    }
    out.returns[i] = evaluate(Action::from_array(out.candidates[i]), i);
  }

  // Elite selection: stable sort keeps sampling order on ties.
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return out.returns[a] > out.returns[b]; });
  out.elite_indices.assign(order.begin(), order.begin() + elites);

  out.best_return = out.returns[order[0]];
  double elite_sum = 0, all_sum = 0;
  for (double r : out.returns) all_sum += r;
  out.mean_return = all_sum / n;

  CemState next;
  for (int d = 0; d < kActionDim; ++d) {
    double m = 0;
    for (int e : out.elite_indices) m += out.candidates[e][d];
    m /= elites;
    double v = 0;
    for (int e : out.elite_indices) {
      const double diff = out.candidates[e][d] - m;
      v += diff * diff;
    }
    v /= elites;
    const double floor = cfg.var_floor_frac * bounds.range(d) * bounds.range(d);
    next.mean[d] = m;
    next.var[d] = std::max(v, floor);
  }
  for (int e : out.elite_indices) elite_sum += out.returns[e];
  out.elite_mean_return = elite_sum / elites;
  out.state = next;
  return out;
}

}  // namespace isim::agents
