#include "isim/agents/ppo.hpp"

#include <algorithm>
#include <cmath>

#include "isim/errors.hpp"

namespace isim::agents {

using env::Action;
using env::ActionBounds;
using env::kActionDim;
using env::kStateDim;
using num::Matrix;
using num::Mlp;
using num::Vector;

std::pair<std::vector<double>, std::vector<double>> gae(
    const std::vector<double>& rewards, const std::vector<double>& values,
    const std::vector<bool>& dones, double gamma, double lambda) {
  if (values.size() != rewards.size() + 1)
    throw shape_error("gae: values must have one bootstrap entry more than rewards");
  if (dones.size() != rewards.size()) throw shape_error("gae: dones length");
  const int T = static_cast<int>(rewards.size());
  std::vector<double> adv(T), ret(T);
  double running = 0.0;
  for (int t = T - 1; t >= 0; --t) {
    const double mask = dones[t] ? 0.0 : 1.0;
    const double delta = rewards[t] + gamma * mask * values[t + 1] - values[t];
    running = delta + gamma * lambda * mask * running;
    adv[t] = running;
    ret[t] = adv[t] + values[t];
  }
  return {std::move(adv), std::move(ret)};
}

namespace {

std::vector<num::LayerSpec> policy_spec() {
  using num::LayerKind;
  return {{LayerKind::Linear, kStateDim, 256}, {LayerKind::SiLU},
          {LayerKind::Linear, 256, 256},       {LayerKind::SiLU},
          {LayerKind::Linear, 256, kActionDim}, {LayerKind::Sigmoid}};
}

std::vector<num::LayerSpec> value_spec() {
  using num::LayerKind;
  // One extra input: the normalized turn index.
  return {{LayerKind::Linear, kStateDim + 1, 256}, {LayerKind::SiLU},
          {LayerKind::Linear, 256, 256},           {LayerKind::SiLU},
          {LayerKind::Linear, 256, 1}};
}

num::Vector value_input(const std::array<double, kStateDim>& s, int turn) {
  num::Vector v(s.begin(), s.end());
  v.push_back(turn / 25.0);
  return v;
}

constexpr double kLog2Pi = 1.8378770664093454836;

}  // namespace

std::pair<double, double> ppo_objective_terms(double ratio, double adv, double clip) {
  return {ratio * adv, std::clamp(ratio, 1.0 - clip, 1.0 + clip) * adv};
}

PpoAgent::PpoAgent(const ActionBounds& bounds, const PpoConfig& cfg,
                   std::uint64_t seed)
    : bounds_(bounds), cfg_(cfg), rng_(seed, 200) {
  policy_ = Mlp::make(policy_spec(), rng_, /*zero_last_linear=*/true);
  value_ = Mlp::make(value_spec(), rng_);
  log_std_.assign(kActionDim, std::log(cfg.init_std_frac));
  opt_policy_ = num::Adam(policy_.param_count(), {cfg.lr});
  opt_value_ = num::Adam(value_.param_count(), {cfg.lr});
  opt_log_std_ = num::Adam(kActionDim, {cfg.lr});
  rollout_.reserve(cfg.rollout + 32);
}

Action PpoAgent::scale(const Vector& u) const {
  std::array<double, kActionDim> a{};
  for (int d = 0; d < kActionDim; ++d)
    a[d] = bounds_.lower[d] + bounds_.range(d) * u[d];
  return Action::from_array(a);
}

Action PpoAgent::act_mean(const std::array<double, kStateDim>& s) const {
  return scale(policy_.forward(Vector(s.begin(), s.end())));
}

PpoAgent::ActResult PpoAgent::act(const std::array<double, kStateDim>& s, int turn) {
  const Vector sv(s.begin(), s.end());
  const auto mean = scale(policy_.forward(sv)).to_array();
  const double v = value_.forward(value_input(s, turn))[0];

  ActResult out;
  out.sample.s = s;
  out.sample.turn = turn;
  out.sample.value = v;
  double logp = 0;
  std::array<double, kActionDim> exec{};
  for (int d = 0; d < kActionDim; ++d) {
    const double sigma =
        std::exp(std::clamp(log_std_[d], cfg_.log_std_min, cfg_.log_std_max)) *
        bounds_.range(d);
    const double raw = mean[d] + sigma * rng_.normal();
    const double z = (raw - mean[d]) / sigma;
    logp += -0.5 * z * z - std::log(sigma) - 0.5 * kLog2Pi;
    out.sample.raw_a[d] = raw;
    exec[d] = std::clamp(raw, bounds_.lower[d], bounds_.upper[d]);
  }
  out.sample.logp = logp;
  out.action = Action::from_array(exec);
  return out;
}

double PpoAgent::uncertainty() const {
  double u = 0;
  for (int d = 0; d < kActionDim; ++d) {
    const double ls = std::clamp(log_std_[d], cfg_.log_std_min, cfg_.log_std_max);
    u += (ls - cfg_.log_std_min) / (cfg_.log_std_max - cfg_.log_std_min);
  }
  return std::clamp(u / kActionDim, 0.0, 1.0);
}

PpoLossReport PpoAgent::record(const PpoSample& sample) {
  rollout_.push_back(sample);
  // Update at an episode boundary so the bootstrap value is exactly zero.
  if (sample.done && static_cast<int>(rollout_.size()) >= cfg_.rollout)
    return update();
  return {};
}

PpoLossReport PpoAgent::update() {
  PpoLossReport report;
  report.updated = true;
  const int T = static_cast<int>(rollout_.size());

  std::vector<double> rewards(T), values(T + 1, 0.0);
  std::vector<bool> dones(T);
  for (int t = 0; t < T; ++t) {
    rewards[t] = rollout_[t].reward;
    values[t] = rollout_[t].value;
    dones[t] = rollout_[t].done;
  }
  auto [adv, ret] = gae(rewards, values, dones, cfg_.gamma, cfg_.gae_lambda);

  double mean_a = 0, var_a = 0;
  for (double a : adv) mean_a += a;
  mean_a /= T;
  for (double a : adv) var_a += (a - mean_a) * (a - mean_a);
  var_a /= T;
  const double std_a = std::sqrt(var_a) + 1e-8;
  for (double& a : adv) a = (a - mean_a) / std_a;

  std::vector<int> order(T);
  for (int i = 0; i < T; ++i) order[i] = i;

  double policy_loss_acc = 0, value_loss_acc = 0, entropy_acc = 0;
  int minibatches = 0;

  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    for (int i = T - 1; i > 0; --i)
      std::swap(order[i], order[rng_.uniform_int(static_cast<std::uint64_t>(i) + 1)]);
    for (int start = 0; start + 1 <= T; start += cfg_.minibatch) {
      const int B = std::min(cfg_.minibatch, T - start);
      Matrix s(B, kStateDim);
      for (int i = 0; i < B; ++i) {
        const auto& smp = rollout_[order[start + i]];
        for (int j = 0; j < kStateDim; ++j) s.at(i, j) = smp.s[j];
      }

      // Policy pass.
      num::MlpCache pcache;
      Matrix u;
      policy_.forward_batch(s, pcache, u);

      std::array<double, kActionDim> sigma{}, ls_eff{};
      std::array<bool, kActionDim> ls_free{};
      for (int d = 0; d < kActionDim; ++d) {
        ls_eff[d] = std::clamp(log_std_[d], cfg_.log_std_min, cfg_.log_std_max);
        ls_free[d] = log_std_[d] > cfg_.log_std_min && log_std_[d] < cfg_.log_std_max;
        sigma[d] = std::exp(ls_eff[d]) * bounds_.range(d);
      }

      Matrix du(B, kActionDim);
      std::vector<double> dls(kActionDim, 0.0);
      double entropy = 0;
      for (int d = 0; d < kActionDim; ++d)
        entropy += std::log(sigma[d]) + 0.5 * (1.0 + kLog2Pi);

      for (int i = 0; i < B; ++i) {
        const auto& smp = rollout_[order[start + i]];
        double logp = 0;
        std::array<double, kActionDim> z{};
        for (int d = 0; d < kActionDim; ++d) {
          const double mean =
              bounds_.lower[d] + bounds_.range(d) * u.at(i, d);
          z[d] = (smp.raw_a[d] - mean) / sigma[d];
          logp += -0.5 * z[d] * z[d] - std::log(sigma[d]) - 0.5 * kLog2Pi;
        }
        const double ratio = std::exp(logp - smp.logp);
        const double a = adv[order[start + i]];
        const auto [surr1, surr2] = ppo_objective_terms(ratio, a, cfg_.clip);
        policy_loss_acc -= std::min(surr1, surr2) / B;
        // Gradient flows through the unclipped branch only.
        const double g = (surr1 <= surr2) ? -ratio * a / B : 0.0;
        for (int d = 0; d < kActionDim; ++d) {
          du.at(i, d) = g * (z[d] / sigma[d]) * bounds_.range(d);
          if (ls_free[d]) dls[d] += g * (z[d] * z[d] - 1.0);
        }
      }
      // Entropy bonus (maximized).
      entropy_acc += entropy;
      for (int d = 0; d < kActionDim; ++d)
        if (ls_free[d]) dls[d] -= cfg_.entropy_coef;

      std::vector<double> pgrad(policy_.param_count(), 0.0);
      policy_.backward_batch(du, pcache, pgrad, nullptr);
      opt_policy_.step(policy_.params(), pgrad);
      opt_log_std_.step(log_std_, dls);

      // Value pass.
      Matrix sv(B, kStateDim + 1);
      for (int i = 0; i < B; ++i) {
        const auto& smp = rollout_[order[start + i]];
        for (int j = 0; j < kStateDim; ++j) sv.at(i, j) = smp.s[j];
        sv.at(i, kStateDim) = smp.turn / 25.0;
      }
      num::MlpCache vcache;
      Matrix v;
      value_.forward_batch(sv, vcache, v);
      Matrix dv(B, 1);
      double vloss = 0;
      for (int i = 0; i < B; ++i) {
        const double err = v.at(i, 0) - ret[order[start + i]];
        vloss += 0.5 * err * err / B;
        dv.at(i, 0) = cfg_.value_coef * err / B;
      }
      value_loss_acc += cfg_.value_coef * vloss;
      std::vector<double> vgrad(value_.param_count(), 0.0);
      value_.backward_batch(dv, vcache, vgrad, nullptr);
      opt_value_.step(value_.params(), vgrad);

      ++minibatches;
    }
  }

  report.policy_loss = policy_loss_acc / std::max(1, minibatches);
  report.value_loss = value_loss_acc / std::max(1, minibatches);
  report.entropy = entropy_acc / std::max(1, minibatches);
  rollout_.clear();
  return report;
}

}  // namespace isim::agents
