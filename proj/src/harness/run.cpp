#include "isim/harness/run.hpp"

#include <algorithm>
#include <cmath>

#include "isim/cohort/generator.hpp"
#include "isim/harness/series.hpp"

namespace isim::harness {

using agents::CemState;
using agents::Checkpoint;
using agents::PpoAgent;
using agents::Td3Agent;
using agents::Transition;
using env::Action;
using env::InterviewEnv;
using env::Observation;
using env::StepResult;

namespace {

// Marsaglia-Tsang gamma sampler (shape >= 1), used by the Dirichlet
// preference draw.
double sample_gamma(double shape, num::Rng& rng) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = rng.normal();
    const double t = 1.0 + c * x;
    if (t <= 0) continue;
    const double v = t * t * t;
    const double u = rng.uniform();
    if (u == 0) continue;
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

std::array<double, env::kMetricDim> sample_dirichlet_weights(double concentration,
                                                             num::Rng& rng) {
  std::array<double, env::kMetricDim> w{};
  double sum = 0;
  for (auto& v : w) {
    v = sample_gamma(concentration, rng);
    sum += v;
  }
  for (auto& v : w) v /= sum;
  return w;
}

struct EpisodeAccumulator {
  double reward = 0;
  std::array<double, env::kMetricDim> metrics{};
  double wait = 0, overlap = 0;
  int unnecessary = 0, clean = 0, turns = 0;
  int bc_total = 0, bc_inside = 0;

  void add(const StepResult& r) {
    reward += r.reward;
    const auto m = r.metrics.to_array();
    for (int i = 0; i < env::kMetricDim; ++i) metrics[i] += m[i];
    wait += r.wait_raw;
    overlap += r.overlap_raw;
    unnecessary += r.unnecessary_clarify;
    clean += r.clean_cut;
    bc_total += r.bc_total;
    bc_inside += r.bc_inside;
    ++turns;
  }

  EpisodeStats finish(const env::EpisodeSummary& summary) const {
    EpisodeStats s;
    s.reward = reward / turns;
    for (int i = 0; i < env::kMetricDim; ++i) s.metrics[i] = metrics[i] / turns;
    // Coverage reports end-of-episode completeness, not the running mean.
    s.metrics[0] = static_cast<double>(summary.delivered) / quest::kScheduleLength;
    s.wait_raw = wait / turns;
    s.overlap_raw = overlap / turns;
    s.unnecessary_clarify_rate = static_cast<double>(unnecessary) / turns;
    s.clean_cut_rate = static_cast<double>(clean) / turns;
    s.bc_precision = bc_total == 0 ? 1.0 : static_cast<double>(bc_inside) / bc_total;
    s.delivered = summary.delivered;
    s.legacy = summary.legacy;
    s.dep_correct = summary.screen_dep_correct ? 1.0 : 0.0;
    s.ptsd_correct = summary.screen_ptsd_correct ? 1.0 : 0.0;
    return s;
  }
};

std::string item_name(int index) {
  if (index < quest::kPhq8Items) return "PHQ8:" + std::to_string(index + 1);
  return "PCLC:" + std::to_string(index - quest::kPhq8Items + 1);
}

void log_turn(RunResult& out, int episode, const std::array<double, 20>& state,
              const Action& action, const StepResult& r) {
  env::TurnRecord rec;
  rec.episode = episode;
  rec.turn = r.item_index;
  rec.item = item_name(r.item_index);
  rec.likert = r.likert;
  rec.confidence = r.confidence;
  rec.reward = r.reward;
  rec.skipped = r.skipped;
  rec.s = state;
  rec.a = action.to_array();
  rec.m = r.metrics.to_array();
  for (const auto& a : r.audits) rec.audit_kinds.push_back(env::audit_kind_name(a.kind));
  out.sampled_turns.push_back(std::move(rec));
  for (const auto& a : r.audits)
    out.audit_lines.push_back({episode, a.turn, env::audit_kind_name(a.kind),
                               a.proposed_cut, a.applied_cut});
}

cohort::Cohort training_split(const RunConfig& cfg) {
  const auto full = cohort::generate_cohort(cfg.cohort_n, cfg.cohort_seed);
  return cohort::split_holdout(full, cfg.holdout_fraction, cfg.cohort_seed).first;
}

env::EnvConfig episode_env_config(const RunConfig& cfg, const env::EnvConfig& base,
                                  num::Rng& weight_rng) {
  env::EnvConfig e = base;
  if (cfg.dirichlet_w)
    e.weights.w = sample_dirichlet_weights(cfg.dirichlet_concentration, weight_rng);
  return e;
}

RunResult train_td3(const RunConfig& cfg, std::uint64_t seed,
                    const cohort::Cohort& patients, const env::EnvConfig& env_base) {
  RunResult out;
  out.seed = seed;
  out.config_hash = cfg.hash();

  agents::Td3Config acfg = cfg.td3;
  acfg.xf_gating = cfg.xf;
  if (!cfg.cf) acfg.lambda_cf = 0.0;
  Td3Agent agent(env::ActionBounds{}, acfg, seed);
  num::Rng weight_rng(seed, 7);

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    const auto& patient = patients[ep % patients.size()];
    InterviewEnv env(patient, episode_env_config(cfg, env_base, weight_rng), seed,
                     1 + static_cast<std::uint64_t>(ep));
    Observation obs = env.reset();
    EpisodeAccumulator acc;
    const bool log_this = (ep % cfg.log_every) == 0;
    while (!env.done()) {
      const Action a = agent.act_explore(obs.s);
      const double u = agent.uncertainty(obs.s, a);
      const StepResult r = env.step(a, u);
      Transition tr;
      tr.s = obs.s;
      tr.a = a.to_array();
      tr.r = r.reward;
      tr.s_next = r.obs.s;
      tr.done = r.done;
      tr.has_cf = obs.has_cf;
      tr.s_cf = obs.s_cf;
      tr.blocks = obs.blocks;
      agent.observe(tr);
      agent.on_step();
      acc.add(r);
      if (log_this) log_turn(out, ep, obs.s, a, r);
      obs = r.obs;
    }
    out.episodes.push_back(acc.finish(env.summary()));
    if (ep + 1 == kRollingWindow) out.early = agents::td3_checkpoint(agent, out.config_hash);
  }
  out.final = agents::td3_checkpoint(agent, out.config_hash);
  if (out.early.tensors.empty()) out.early = out.final;
  return out;
}

RunResult train_ppo(const RunConfig& cfg, std::uint64_t seed,
                    const cohort::Cohort& patients, const env::EnvConfig& env_base) {
  RunResult out;
  out.seed = seed;
  out.config_hash = cfg.hash();

  PpoAgent agent(env::ActionBounds{}, cfg.ppo, seed);
  num::Rng weight_rng(seed, 7);

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    const auto& patient = patients[ep % patients.size()];
    InterviewEnv env(patient, episode_env_config(cfg, env_base, weight_rng), seed,
                     1 + static_cast<std::uint64_t>(ep));
    Observation obs = env.reset();
    EpisodeAccumulator acc;
    const bool log_this = (ep % cfg.log_every) == 0;
    while (!env.done()) {
      auto ar = agent.act(obs.s, env.turn());
      const double u = agent.uncertainty();
      const StepResult r = env.step(ar.action, u);
      ar.sample.reward = r.reward;
      ar.sample.done = r.done;
      agent.record(ar.sample);
      acc.add(r);
      if (log_this) log_turn(out, ep, obs.s, ar.action, r);
      obs = r.obs;
    }
    out.episodes.push_back(acc.finish(env.summary()));
    if (ep + 1 == kRollingWindow) out.early = agents::ppo_checkpoint(agent, out.config_hash);
  }
  out.final = agents::ppo_checkpoint(agent, out.config_hash);
  if (out.early.tensors.empty()) out.early = out.final;
  return out;
}

RunResult train_cem(const RunConfig& cfg, std::uint64_t seed,
                    const cohort::Cohort& patients, const env::EnvConfig& env_base) {
  RunResult out;
  out.seed = seed;
  out.config_hash = cfg.hash();

  agents::CemConfig ccfg = cfg.cem;
  // Each generation consumes the population's episodes plus a selection-free
  // evaluation of the refit mean; the curve reports the deployable policy.
  const int block = ccfg.population + ccfg.eval_episodes;
  const int iterations = std::max(1, std::min(ccfg.iterations, cfg.episodes / block));
  auto state = agents::cem_init(env::ActionBounds{}, ccfg);
  const auto init_var = state.var;
  num::Rng rng(seed, 300);
  num::Rng weight_rng(seed, 7);

  std::vector<EpisodeStats> iter_curve_stats;
  for (int it = 0; it < iterations; ++it) {
    double u_pop = 0;
    for (int d = 0; d < env::kActionDim; ++d) u_pop += state.var[d] / init_var[d];
    u_pop = std::clamp(u_pop / env::kActionDim, 0.0, 1.0);

    std::vector<EpisodeStats> candidate_stats(ccfg.population);
    auto evaluate = [&](const Action& a, int idx) {
      const int ep = it * block + idx;
      const auto& patient = patients[ep % patients.size()];
      InterviewEnv env(patient, episode_env_config(cfg, env_base, weight_rng), seed,
                       1 + static_cast<std::uint64_t>(ep));
      Observation obs = env.reset();
      EpisodeAccumulator acc;
      const bool log_this = (ep % cfg.log_every) == 0;
      while (!env.done()) {
        const StepResult r = env.step(a, u_pop);
        acc.add(r);
        if (log_this) log_turn(out, ep, obs.s, a, r);
        obs = r.obs;
      }
      candidate_stats[idx] = acc.finish(env.summary());
      return candidate_stats[idx].reward;
    };

    const auto res = agents::cem_iterate(state, evaluate, env::ActionBounds{}, ccfg, rng);
    state = res.state;

    // Score the refit mean on fresh episodes; candidate returns would
    // overstate the policy through selection luck.
    const Action deployed = Action::from_array(state.mean);
    EpisodeStats curve{};
    for (int k = 0; k < ccfg.eval_episodes; ++k) {
      const int ep = it * block + ccfg.population + k;
      const auto& patient = patients[ep % patients.size()];
      InterviewEnv env(patient, episode_env_config(cfg, env_base, weight_rng), seed,
                       1 + static_cast<std::uint64_t>(ep));
      Observation obs = env.reset();
      EpisodeAccumulator acc;
      const bool log_this = (ep % cfg.log_every) == 0;
      while (!env.done()) {
        const StepResult r = env.step(deployed, u_pop);
        acc.add(r);
        if (log_this) log_turn(out, ep, obs.s, deployed, r);
        obs = r.obs;
      }
      const auto stats = acc.finish(env.summary());
      curve.reward += stats.reward;
      for (int i = 0; i < env::kMetricDim; ++i) curve.metrics[i] += stats.metrics[i];
      curve.wait_raw += stats.wait_raw;
      curve.overlap_raw += stats.overlap_raw;
      curve.unnecessary_clarify_rate += stats.unnecessary_clarify_rate;
      curve.clean_cut_rate += stats.clean_cut_rate;
      curve.bc_precision += stats.bc_precision;
      curve.delivered += stats.delivered;
      curve.legacy += stats.legacy;
      curve.dep_correct += stats.dep_correct;
      curve.ptsd_correct += stats.ptsd_correct;
    }
    const double k = static_cast<double>(ccfg.eval_episodes);
    curve.reward /= k;
    for (auto& m : curve.metrics) m /= k;
    curve.wait_raw /= k;
    curve.overlap_raw /= k;
    curve.unnecessary_clarify_rate /= k;
    curve.clean_cut_rate /= k;
    curve.bc_precision /= k;
    curve.delivered /= k;
    curve.legacy /= k;
    curve.dep_correct /= k;
    curve.ptsd_correct /= k;
    iter_curve_stats.push_back(curve);

    out.cem_iterations.push_back(
        {it, res.best_return, res.elite_mean_return, res.mean_return});
    out.cem_iterations.back().deployed_mean_return = curve.reward;

    if (it == 0) out.early = agents::cem_checkpoint(state, 1, out.config_hash);
  }
  out.final = agents::cem_checkpoint(state, iterations, out.config_hash);

  // Expand per-iteration values onto the shared episode axis.
  out.episodes.resize(cfg.episodes);
  for (int ep = 0; ep < cfg.episodes; ++ep) {
    const int it = std::min(ep / block, iterations - 1);
    out.episodes[ep] = iter_curve_stats[it];
  }
  return out;
}

}  // namespace

std::vector<double> reward_series(const std::vector<EpisodeStats>& eps) {
  std::vector<double> out(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) out[i] = eps[i].reward;
  return out;
}

std::vector<double> metric_series(const std::vector<EpisodeStats>& eps, int metric) {
  std::vector<double> out(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) out[i] = eps[i].metrics[metric];
  return out;
}

RunResult train_run(const RunConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const auto patients = training_split(cfg);
  const auto env_base = cfg.env_config();
  switch (cfg.agent) {
    case AgentKind::TD3: return train_td3(cfg, seed, patients, env_base);
    case AgentKind::PPO: return train_ppo(cfg, seed, patients, env_base);
    case AgentKind::CEM: return train_cem(cfg, seed, patients, env_base);
  }
  throw config_error("train_run: unknown agent kind");
}

std::vector<EpisodeStats> evaluate_policy(const RunConfig& cfg,
                                          const agents::Checkpoint& ck,
                                          const cohort::Cohort& patients,
                                          int episodes, std::uint64_t seed,
                                          const env::EnvConfig& env_cfg) {
  std::vector<EpisodeStats> out;
  out.reserve(episodes);

  std::optional<Td3Agent> td3;
  std::optional<PpoAgent> ppo;
  CemState cem_state;
  double cem_u = 0;
  if (ck.kind == "td3") {
    agents::Td3Config acfg = cfg.td3;
    acfg.xf_gating = cfg.xf;
    td3.emplace(env::ActionBounds{}, acfg, seed);
    agents::td3_restore(*td3, ck);
  } else if (ck.kind == "ppo") {
    ppo.emplace(env::ActionBounds{}, cfg.ppo, seed);
    agents::ppo_restore(*ppo, ck);
  } else if (ck.kind == "cem") {
    cem_state = agents::cem_restore(ck);
    const auto init = agents::cem_init(env::ActionBounds{}, cfg.cem);
    for (int d = 0; d < env::kActionDim; ++d)
      cem_u += cem_state.var[d] / init.var[d];
    cem_u = std::clamp(cem_u / env::kActionDim, 0.0, 1.0);
  } else {
    throw io_error("evaluate_policy: unknown checkpoint kind " + ck.kind);
  }

  for (int ep = 0; ep < episodes; ++ep) {
    const auto& patient = patients[ep % patients.size()];
    InterviewEnv env(patient, env_cfg, seed, 500000 + static_cast<std::uint64_t>(ep));
    Observation obs = env.reset();
    EpisodeAccumulator acc;
    while (!env.done()) {
      Action a;
      double u = 0;
      if (td3) {
        a = td3->act(obs.s);
        u = td3->uncertainty(obs.s, a);
      } else if (ppo) {
        a = ppo->act_mean(obs.s);
        u = ppo->uncertainty();
      } else {
        a = Action::from_array(cem_state.mean);
        u = cem_u;
      }
      const StepResult r = env.step(a, u);
      acc.add(r);
      obs = r.obs;
    }
    out.push_back(acc.finish(env.summary()));
  }
  return out;
}

DecisionQuality decision_quality(const std::vector<EpisodeStats>& eps, int lastn) {
  if (eps.empty()) throw shape_error("decision_quality: no episodes");
  const int n = std::min<int>(lastn, static_cast<int>(eps.size()));
  DecisionQuality q;
  for (std::size_t i = eps.size() - n; i < eps.size(); ++i) {
    q.wait_s += eps[i].wait_raw;
    q.overlap_s += eps[i].overlap_raw;
    q.clarify_pct += eps[i].unnecessary_clarify_rate;
    q.cut_consistency_pct += eps[i].clean_cut_rate;
    q.bc_precision_pct += eps[i].bc_precision;
  }
  // Time-unit fields convert to seconds (10 units per second).
  q.wait_s = q.wait_s / n / 10.0;
  q.overlap_s = q.overlap_s / n / 10.0;
  q.clarify_pct = q.clarify_pct / n * 100.0;
  q.cut_consistency_pct = q.cut_consistency_pct / n * 100.0;
  q.bc_precision_pct = q.bc_precision_pct / n * 100.0;
  return q;
}

}  // namespace isim::harness
