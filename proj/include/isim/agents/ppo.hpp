#pragma once

#include <vector>

#include "isim/env/action.hpp"
#include "isim/env/metrics.hpp"
#include "isim/num/adam.hpp"
#include "isim/num/mlp.hpp"

namespace isim::agents {

struct PpoConfig {
  double gamma = 0.985;
  double gae_lambda = 0.92;
  double clip = 0.2;
  double entropy_coef = 0.004;
  double value_coef = 0.5;
  double lr = 3e-4;
  int rollout = 1024;
  int epochs = 4;
  int minibatch = 256;
  // Policy std is a fraction of each dimension's range.
  double init_std_frac = 0.2;
  double log_std_min = -6.9077552789821368;  // ln(1e-3)
  double log_std_max = 0.0;                  // ln(1)
};

// Generalized advantage estimation; values has one bootstrap entry more
// than rewards. Returns (advantages, returns).
std::pair<std::vector<double>, std::vector<double>> gae(
    const std::vector<double>& rewards, const std::vector<double>& values,
    const std::vector<bool>& dones, double gamma, double lambda);

// The two branches of the clipped-ratio objective.
std::pair<double, double> ppo_objective_terms(double ratio, double adv, double clip);

struct PpoSample {
  std::array<double, env::kStateDim> s{};
  std::array<double, env::kActionDim> raw_a{};  // pre-clip sample
  int turn = 0;  // turn index within the episode (value-head feature)
  double logp = 0;
  double value = 0;
  double reward = 0;
  bool done = false;
};

struct PpoLossReport {
  bool updated = false;
  double policy_loss = 0;
  double value_loss = 0;
  double entropy = 0;
};

// Clipped-ratio PPO with a Gaussian head: the mean is squashed to the
// bounds exactly like the TD3 actor, the log-std is a learned per-dimension
// parameter in range-fraction units. The value head additionally sees the
// normalized turn index; returns-to-go depend strongly on the remaining
// horizon, which the 20-D state does not encode.
class PpoAgent {
 public:
  PpoAgent(const env::ActionBounds& bounds, const PpoConfig& cfg, std::uint64_t seed);

  struct ActResult {
    env::Action action;   // clipped, what the environment executes
    PpoSample sample;     // what the learner stores
  };
  ActResult act(const std::array<double, env::kStateDim>& s, int turn);
  env::Action act_mean(const std::array<double, env::kStateDim>& s) const;

  // Normalized policy entropy in [0,1] for the turn manager.
  double uncertainty() const;

  // Stores the outcome of the last acted step; runs an update pass once the
  // rollout buffer is full.
  PpoLossReport record(const PpoSample& sample);

  num::Mlp& policy() { return policy_; }
  num::Mlp& value() { return value_; }
  std::vector<double>& log_std() { return log_std_; }
  num::Adam& policy_opt() { return opt_policy_; }
  num::Adam& value_opt() { return opt_value_; }
  num::Adam& log_std_opt() { return opt_log_std_; }
  num::Rng& rng() { return rng_; }
  const PpoConfig& config() const { return cfg_; }

 private:
  PpoLossReport update();
  env::Action scale(const num::Vector& u) const;

  env::ActionBounds bounds_;
  PpoConfig cfg_;
  num::Rng rng_;
  num::Mlp policy_, value_;
  std::vector<double> log_std_;
  num::Adam opt_policy_, opt_value_, opt_log_std_;
  std::vector<PpoSample> rollout_;
};

}  // namespace isim::agents
