#include "isim/agents/td3.hpp"

#include <algorithm>
#include <cmath>

namespace isim::agents {

using env::Action;
using env::ActionBounds;
using env::kActionDim;
using env::kStateDim;
using num::Matrix;
using num::Mlp;
using num::Rng;
using num::Vector;

namespace {

std::vector<num::LayerSpec> actor_spec() {
  using num::LayerKind;
  return {{LayerKind::Linear, kStateDim, 256}, {LayerKind::LayerNorm},
          {LayerKind::SiLU},                   {LayerKind::Linear, 256, 256},
          {LayerKind::SiLU},                   {LayerKind::Linear, 256, kActionDim},
          {LayerKind::Sigmoid}};
}

std::vector<num::LayerSpec> critic_spec() {
  using num::LayerKind;
  return {{LayerKind::Linear, kStateDim + kActionDim, 256},
          {LayerKind::SiLU},
          {LayerKind::Linear, 256, 256},
          {LayerKind::SiLU},
          {LayerKind::Linear, 256, 1}};
}

}  // namespace

std::vector<double> td3_targets(
    const std::vector<Transition>& batch,
    const std::function<Action(const std::array<double, kStateDim>&)>& target_actor,
    const std::function<double(const std::array<double, kStateDim>&, const Action&)>&
        target_q1,
    const std::function<double(const std::array<double, kStateDim>&, const Action&)>&
        target_q2,
    const ActionBounds& bounds, const Td3Config& cfg, Rng& rng) {
  std::vector<double> y(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& t = batch[i];
    auto a = target_actor(t.s_next).to_array();
    for (int d = 0; d < kActionDim; ++d) {
      const double range = bounds.range(d);
      const double noise = std::clamp(rng.normal(0, cfg.target_sigma * range),
                                      -cfg.target_clip * range,
                                      cfg.target_clip * range);
      a[d] = std::clamp(a[d] + noise, bounds.lower[d], bounds.upper[d]);
    }
    const Action smoothed = Action::from_array(a);
    const double q = std::min(target_q1(t.s_next, smoothed),
                              target_q2(t.s_next, smoothed));
    y[i] = t.r + cfg.gamma * (t.done ? 0.0 : 1.0) * q;
  }
  return y;
}

Td3Agent::Td3Agent(const ActionBounds& bounds, const Td3Config& cfg,
                   std::uint64_t seed)
    : bounds_(bounds), cfg_(cfg), rng_(seed, 100), buffer_(cfg.buffer_capacity) {
  actor_ = Mlp::make(actor_spec(), rng_, /*zero_last_linear=*/true);
  q1_ = Mlp::make(critic_spec(), rng_);
  q2_ = Mlp::make(critic_spec(), rng_);
  actor_t_ = actor_;
  q1_t_ = q1_;
  q2_t_ = q2_;
  opt_actor_ = num::Adam(actor_.param_count(), {cfg.lr});
  opt_q1_ = num::Adam(q1_.param_count(), {cfg.lr});
  opt_q2_ = num::Adam(q2_.param_count(), {cfg.lr});
}

Action Td3Agent::scale_to_bounds(const Vector& u) const {
  std::array<double, kActionDim> a{};
  for (int d = 0; d < kActionDim; ++d)
    a[d] = bounds_.lower[d] + bounds_.range(d) * u[d];
  return Action::from_array(a);
}

Action Td3Agent::act(const std::array<double, kStateDim>& s) const {
  return scale_to_bounds(actor_.forward(Vector(s.begin(), s.end())));
}

Action Td3Agent::act_explore(const std::array<double, kStateDim>& s) {
  auto a = act(s).to_array();
  for (int d = 0; d < kActionDim; ++d) {
    const double range = bounds_.range(d);
    a[d] = std::clamp(a[d] + rng_.normal(0, cfg_.explore_sigma * range),
                      bounds_.lower[d], bounds_.upper[d]);
  }
  return Action::from_array(a);
}

double Td3Agent::uncertainty(const std::array<double, kStateDim>& s,
                             const Action& a) const {
  Vector x(kStateDim + kActionDim);
  std::copy(s.begin(), s.end(), x.begin());
  const auto av = a.to_array();
  std::copy(av.begin(), av.end(), x.begin() + kStateDim);
  const double q1 = q1_.forward(x)[0];
  const double q2 = q2_.forward(x)[0];
  return std::min(1.0, std::abs(q1 - q2) / cfg_.q_disagreement_scale);
}

void Td3Agent::observe(const Transition& t) { buffer_.push(t); }

Td3LossReport Td3Agent::on_step() {
  env_steps_++;
  if (env_steps_ <= static_cast<std::uint64_t>(cfg_.warmup_steps)) return {};
  if (cfg_.update_every > 1 && env_steps_ % cfg_.update_every != 0) return {};
  return update();
}

std::array<double, kStateDim> Td3Agent::dropout_state(const Transition& t) {
  std::array<double, 3> gates{};
  if (cfg_.xf_gating) {
    const double sum = t.blocks.kappa[0] + t.blocks.kappa[1] + t.blocks.kappa[2];
    if (sum > 1e-12)
      for (int m = 0; m < 3; ++m) gates[m] = t.blocks.kappa[m] / sum;
  } else {
    gates = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  }
  bool dropped = false;
  for (int m = 0; m < 3; ++m) {
    if (t.blocks.kappa[m] < cfg_.kappa_drop_threshold &&
        rng_.uniform() < cfg_.kappa_drop_rate) {
      gates[m] = 0.0;
      dropped = true;
    }
  }
  std::array<double, kStateDim> s = t.s;
  if (!dropped) return s;
  double kept = gates[0] + gates[1] + gates[2];
  if (kept > 1e-12) {
    for (auto& g : gates) g /= kept;
  }
  for (int r = 0; r < env::kFusionDim; ++r) {
    double acc = 0;
    for (int m = 0; m < 3; ++m) acc += gates[m] * t.blocks.z[m][r];
    s[r] = std::tanh(acc);
  }
  return s;
}

Td3LossReport Td3Agent::update() {
  Td3LossReport report;
  const int B = cfg_.batch;
  if (buffer_.size() < static_cast<std::size_t>(B)) return report;
  report.updated = true;
  update_calls_++;

  const auto idx = buffer_.sample_indices(B, rng_);

  Matrix s_drop(B, kStateDim), s_next(B, kStateDim);
  Matrix x(B, kStateDim + kActionDim);
  std::vector<double> r(B);
  std::vector<double> not_done(B);
  std::vector<int> cf_rows;
  for (int i = 0; i < B; ++i) {
    const Transition& t = buffer_.at(idx[i]);
    const auto sd = dropout_state(t);
    for (int j = 0; j < kStateDim; ++j) {
      s_drop.at(i, j) = sd[j];
      s_next.at(i, j) = t.s_next[j];
      x.at(i, j) = sd[j];
    }
    for (int j = 0; j < kActionDim; ++j) x.at(i, kStateDim + j) = t.a[j];
    r[i] = t.r;
    not_done[i] = t.done ? 0.0 : 1.0;
    if (t.has_cf) cf_rows.push_back(i);
  }

  // Smoothed target action and the pessimistic bootstrap value. Noise is
  // drawn per transition in the same order as the scripted-critic path.
  Matrix noise(B, kActionDim);
  for (int i = 0; i < B; ++i)
    for (int d = 0; d < kActionDim; ++d) {
      const double range = bounds_.range(d);
      noise.at(i, d) =
          std::clamp(rng_.normal(0, cfg_.target_sigma * range),
                     -cfg_.target_clip * range, cfg_.target_clip * range);
    }

  num::MlpCache scratch;
  Matrix u_next;
  actor_t_.forward_batch(s_next, scratch, u_next);
  Matrix x_next(B, kStateDim + kActionDim);
  for (int i = 0; i < B; ++i) {
    for (int j = 0; j < kStateDim; ++j) x_next.at(i, j) = s_next.at(i, j);
    for (int d = 0; d < kActionDim; ++d) {
      const double a =
          bounds_.lower[d] + bounds_.range(d) * u_next.at(i, d) + noise.at(i, d);
      x_next.at(i, kStateDim + d) =
          std::clamp(a, bounds_.lower[d], bounds_.upper[d]);
    }
  }
  Matrix q1n, q2n;
  q1_t_.forward_batch(x_next, scratch, q1n);
  q2_t_.forward_batch(x_next, scratch, q2n);
  std::vector<double> y(B);
  for (int i = 0; i < B; ++i)
    y[i] = r[i] + cfg_.gamma * not_done[i] * std::min(q1n.at(i, 0), q2n.at(i, 0));

  // Critic regression toward y.
  auto train_critic = [&](Mlp& critic, num::Adam& opt, double& loss_out) {
    num::MlpCache cache;
    Matrix q;
    critic.forward_batch(x, cache, q);
    Matrix dq(B, 1);
    double loss = 0;
    for (int i = 0; i < B; ++i) {
      const double err = q.at(i, 0) - y[i];
      loss += err * err;
      dq.at(i, 0) = 2.0 * err / B;
    }
    loss_out = loss / B;
    std::vector<double> grad(critic.param_count(), 0.0);
    critic.backward_batch(dq, cache, grad, nullptr);
    opt.step(critic.params(), grad);
  };
  train_critic(q1_, opt_q1_, report.critic1_loss);
  train_critic(q2_, opt_q2_, report.critic2_loss);

  // Delayed actor and target refresh.
  if (update_calls_ % cfg_.policy_delay == 0) {
    report.actor_updated = true;
    actor_updates_++;

    num::MlpCache actor_cache;
    Matrix u;
    actor_.forward_batch(s_drop, actor_cache, u);
    Matrix x_pi(B, kStateDim + kActionDim);
    for (int i = 0; i < B; ++i) {
      for (int j = 0; j < kStateDim; ++j) x_pi.at(i, j) = s_drop.at(i, j);
      for (int d = 0; d < kActionDim; ++d)
        x_pi.at(i, kStateDim + d) =
            bounds_.lower[d] + bounds_.range(d) * u.at(i, d);
    }
    num::MlpCache q_cache;
    Matrix q;
    q1_.forward_batch(x_pi, q_cache, q);
    double actor_loss = 0;
    for (int i = 0; i < B; ++i) actor_loss -= q.at(i, 0) / B;

    Matrix dq(B, 1);
    for (int i = 0; i < B; ++i) dq.at(i, 0) = -1.0 / B;
    std::vector<double> scratch_grad(q1_.param_count(), 0.0);
    Matrix dx;
    q1_.backward_batch(dq, q_cache, scratch_grad, &dx);

    Matrix du(B, kActionDim);
    for (int i = 0; i < B; ++i)
      for (int d = 0; d < kActionDim; ++d)
        du.at(i, d) = dx.at(i, kStateDim + d) * bounds_.range(d);

    std::vector<double> agrad(actor_.param_count(), 0.0);
    actor_.backward_batch(du, actor_cache, agrad, nullptr);

    // Counterfactual consistency on the normalized (unit-cube) actions for
    // the stored variants: penalize drift between pi(s) and pi(s_cf).
    double cf_loss = 0;
    if (cfg_.lambda_cf > 0 && !cf_rows.empty()) {
      const int K = static_cast<int>(cf_rows.size());
      Matrix s_src(K, kStateDim), s_cf(K, kStateDim);
      for (int k = 0; k < K; ++k) {
        const Transition& t = buffer_.at(idx[cf_rows[k]]);
        for (int j = 0; j < kStateDim; ++j) {
          s_src.at(k, j) = t.s[j];
          s_cf.at(k, j) = t.s_cf[j];
        }
      }
      num::MlpCache cache_src, cache_cf;
      Matrix u_src, u_cf;
      actor_.forward_batch(s_src, cache_src, u_src);
      actor_.forward_batch(s_cf, cache_cf, u_cf);
      Matrix d_src(K, kActionDim), d_cf(K, kActionDim);
      for (int k = 0; k < K; ++k)
        for (int d = 0; d < kActionDim; ++d) {
          const double diff = u_src.at(k, d) - u_cf.at(k, d);
          cf_loss += diff * diff / K;
          d_src.at(k, d) = cfg_.lambda_cf * 2.0 * diff / K;
          d_cf.at(k, d) = -cfg_.lambda_cf * 2.0 * diff / K;
        }
      cf_loss *= cfg_.lambda_cf;
      actor_.backward_batch(d_src, cache_src, agrad, nullptr);
      actor_.backward_batch(d_cf, cache_cf, agrad, nullptr);
    }

    opt_actor_.step(actor_.params(), agrad);
    report.actor_loss = actor_loss + cf_loss;
    report.cf_loss = cf_loss;

    Mlp::polyak_update(actor_t_, actor_, cfg_.tau);
    Mlp::polyak_update(q1_t_, q1_, cfg_.tau);
    Mlp::polyak_update(q2_t_, q2_, cfg_.tau);
  }
  return report;
}

void Td3Agent::restore_counters(std::uint64_t env_steps, std::uint64_t update_calls,
                                std::uint64_t actor_updates) {
  env_steps_ = env_steps;
  update_calls_ = update_calls;
  actor_updates_ = actor_updates;
}

}  // namespace isim::agents
