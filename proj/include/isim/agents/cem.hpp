#pragma once

#include <functional>
#include <vector>

#include "isim/env/action.hpp"
#include "isim/env/metrics.hpp"
#include "isim/num/rng.hpp"

namespace isim::agents {

struct CemConfig {
  int population = 64;
  double elite_frac = 0.25;
  // Variance floor and initial spread as fractions of the squared range.
  double var_floor_frac = 1e-4;
  double init_std_frac = 0.25;
  int iterations = 46;
  // Selection-free episodes per generation used to score the refit mean.
  int eval_episodes = 16;
};

struct CemState {
  std::array<double, env::kActionDim> mean{};
  std::array<double, env::kActionDim> var{};
};

CemState cem_init(const env::ActionBounds& bounds, const CemConfig& cfg);

struct CemIterationResult {
  CemState state;            // refit distribution
  double best_return = 0;
  double elite_mean_return = 0;
  double mean_return = 0;    // across the whole population
  std::vector<int> elite_indices;  // into the sampled population
  std::vector<std::array<double, env::kActionDim>> candidates;
  std::vector<double> returns;
};

// One generation: samples `population` candidates from the diagonal
// Gaussian (clipped to the bounds), scores each with the episode-return
// oracle, refits mean/variance to the top elite_frac (ties broken by
// sampling order) and floors the variance.
CemIterationResult cem_iterate(
    const CemState& state,
    const std::function<double(const env::Action&, int candidate_index)>& evaluate,
    const env::ActionBounds& bounds, const CemConfig& cfg, num::Rng& rng);

}  // namespace isim::agents
