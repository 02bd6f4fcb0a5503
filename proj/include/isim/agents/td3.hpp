#pragma once

#include <functional>
#include <span>

#include "isim/agents/replay.hpp"
#include "isim/env/action.hpp"
#include "isim/env/metrics.hpp"
#include "isim/num/adam.hpp"
#include "isim/num/mlp.hpp"

namespace isim::agents {

struct Td3Config {
  double gamma = 0.985;
  double tau = 0.005;
  double lr = 3e-4;
  std::size_t buffer_capacity = 200000;
  int batch = 256;
  // Noise scales are fractions of the per-dimension range (h - l); raw
  // sigmas are meaningless across dims spanning 14 units and 0.3 units.
  double explore_sigma = 0.06;
  double target_sigma = 0.04;
  double target_clip = 0.08;
  int policy_delay = 2;
  double lambda_cf = 0.1;
  // Reliability dropout on the state's modality blocks during training.
  double kappa_drop_threshold = 0.5;
  double kappa_drop_rate = 0.5;
  bool xf_gating = true;  // matches the env's fusion mode
  // Training cadence.
  int update_every = 5;
  int warmup_steps = 1000;
  // Normalizer for the twin-critic disagreement fed to the turn manager.
  double q_disagreement_scale = 1.0;
};

struct Td3LossReport {
  bool updated = false;
  double critic1_loss = 0;
  double critic2_loss = 0;
  bool actor_updated = false;
  double actor_loss = 0;
  double cf_loss = 0;
};

// Smoothed TD3 targets y = r + gamma*(1-done)*min(Q1', Q2')(s', a~') with
// a~' = clip(actor'(s') + clipped noise). Critics are passed as callables so
// tests can script them.
std::vector<double> td3_targets(
    const std::vector<Transition>& batch,
    const std::function<env::Action(const std::array<double, env::kStateDim>&)>&
        target_actor,
    const std::function<double(const std::array<double, env::kStateDim>&,
                               const env::Action&)>& target_q1,
    const std::function<double(const std::array<double, env::kStateDim>&,
                               const env::Action&)>& target_q2,
    const env::ActionBounds& bounds, const Td3Config& cfg, num::Rng& rng);

class Td3Agent {
 public:
  Td3Agent(const env::ActionBounds& bounds, const Td3Config& cfg,
           std::uint64_t seed);

  // Deterministic policy output (sigmoid head scaled into the bounds).
  env::Action act(const std::array<double, env::kStateDim>& s) const;
  // Exploration adds clipped Gaussian noise scaled by the bound ranges.
  env::Action act_explore(const std::array<double, env::kStateDim>& s);

  // Normalized twin-critic disagreement at (s, a), the agent's uncertainty
  // signal for the turn manager.
  double uncertainty(const std::array<double, env::kStateDim>& s,
                     const env::Action& a) const;

  void observe(const Transition& t);

  // One environment step worth of bookkeeping; triggers a gradient update
  // every `update_every` steps once the warmup has passed.
  Td3LossReport on_step();

  // One gradient update (both critics; actor/targets on the delay cadence).
  Td3LossReport update();

  const ReplayBuffer& buffer() const { return buffer_; }
  std::uint64_t env_steps() const { return env_steps_; }
  std::uint64_t update_calls() const { return update_calls_; }
  std::uint64_t actor_updates() const { return actor_updates_; }

  num::Mlp& actor() { return actor_; }
  num::Mlp& critic1() { return q1_; }
  num::Mlp& critic2() { return q2_; }
  num::Mlp& target_actor() { return actor_t_; }
  num::Mlp& target_critic1() { return q1_t_; }
  num::Mlp& target_critic2() { return q2_t_; }
  num::Adam& actor_opt() { return opt_actor_; }
  num::Adam& critic1_opt() { return opt_q1_; }
  num::Adam& critic2_opt() { return opt_q2_; }
  num::Rng& rng() { return rng_; }
  const Td3Config& config() const { return cfg_; }
  const env::ActionBounds& bounds() const { return bounds_; }

  void restore_counters(std::uint64_t env_steps, std::uint64_t update_calls,
                        std::uint64_t actor_updates);

 private:
  env::Action scale_to_bounds(const num::Vector& sigmoid_out) const;
  // Re-pools a stored state's modality blocks with reliability dropout.
  std::array<double, env::kStateDim> dropout_state(const Transition& t);

  env::ActionBounds bounds_;
  Td3Config cfg_;
  num::Rng rng_;
  num::Mlp actor_, q1_, q2_;
  num::Mlp actor_t_, q1_t_, q2_t_;
  num::Adam opt_actor_, opt_q1_, opt_q2_;
  ReplayBuffer buffer_;
  std::uint64_t env_steps_ = 0;
  std::uint64_t update_calls_ = 0;
  std::uint64_t actor_updates_ = 0;
};

}  // namespace isim::agents
