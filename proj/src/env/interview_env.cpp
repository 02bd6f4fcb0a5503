#include "isim/env/interview_env.hpp"

#include <algorithm>
#include <cmath>

#include "isim/quest/interpreter.hpp"
#include "isim/quest/scoring.hpp"

namespace isim::env {

using cohort::ModalityFrame;
using num::Rng;

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

void EnvConfig::validate() const {
  weights.validate();
  if (dropout_p < 0 || dropout_p > 1)
    throw config_error("env: dropout_p out of [0,1]");
  if (dropout_p > 0 && !pr_enabled)
    throw config_error("env: modality dropout conflicts with prosody-ablated features");
  if (fidelity < 0 || fidelity > 1) throw config_error("env: fidelity out of [0,1]");
  if (p_cf < 0 || p_cf > 1) throw config_error("env: p_cf out of [0,1]");
  if (phq_cutpoint < 1 || phq_cutpoint > 24)
    throw config_error("env: PHQ-8 cutpoint out of 1..24");
  if (pclc_cutpoint < quest::kPclcCutpointMin || pclc_cutpoint > quest::kPclcCutpointMax)
    throw config_error("env: PCL-C cutpoint out of 44..50");
  for (int i = 0; i < 5; ++i)
    if (!(bounds.lower[i] < bounds.upper[i]))
      throw config_error("env: action bounds must satisfy lower < upper");
}

const char* audit_kind_name(AuditKind k) {
  switch (k) {
    case AuditKind::Override: return "override";
    case AuditKind::DwellCap: return "dwell-cap";
    case AuditKind::TimeoutFallback: return "timeout-fallback";
    case AuditKind::BackchannelInjected: return "backchannel-injected";
    case AuditKind::Clarify: return "clarify";
  }
  return "?";
}

int topic_of(const quest::ItemId& item) {
  if (item.instrument == quest::Instrument::PHQ8) return 0;
  switch (item.cluster) {
    case quest::Cluster::B: return 1;
    case quest::Cluster::C: return 2;
    default: return 3;
  }
}

TurnManagerResult turn_manager(const Action& a, double uncertainty,
                               double detected_end, int pause_opportunities,
                               const EnvConfig& cfg, Rng& rng) {
  TurnManagerResult out;
  // Readiness jitter shrinks as the immediacy gain rises.
  out.readiness_jitter =
      std::abs(rng.normal(0, cfg.sigma_ready)) * (2.0 - a.immediacy_gain);
  if (cfg.ua_enabled) {
    // Aim for detected end + a1; the silence watchdog will not let the
    // start slip more than a2 past that.
    out.proposed_cut =
        detected_end + a.target_latency + std::min(out.readiness_jitter, a.max_wait);
    if (uncertainty > cfg.u_bc) {
      const double inject_p = std::min(1.0, a.backchannel_rate * a.immediacy_gain);
      for (int i = 0; i < pause_opportunities; ++i)
        if (rng.uniform() < inject_p) out.backchannels_planned++;
      out.backchannels_planned = std::min(out.backchannels_planned, cfg.bc_per_turn_cap);
    }
  } else {
    out.proposed_cut = detected_end + cfg.fixed_latency + out.readiness_jitter;
  }
  return out;
}

CutDecision safety_check(double proposed_cut, const UtteranceTimeline& tl,
                         double interruption_tolerance, const EnvConfig& cfg,
                         bool defer_early_cuts) {
  CutDecision d;
  d.applied = proposed_cut;
  if (proposed_cut >= tl.end) return d;  // floor already free

  const double tail_start = tl.end - interruption_tolerance * cfg.tol_window;
  auto in_pause = [&](double t) {
    for (double c : tl.pause_centers)
      if (std::abs(t - c) <= tl.pause_halfwidth) return true;
    return false;
  };

  if (proposed_cut >= tail_start || in_pause(proposed_cut)) {
    // Graceful hand-over: the patient yields at the cut.
    return d;
  }

  if (defer_early_cuts) {
    // Defer to the next pause boundary, or the utterance end if none is
    // left. Deferral keeps the cut clean.
    double next = tl.end;
    for (double c : tl.pause_centers) {
      const double boundary = c - tl.pause_halfwidth;
      if (boundary >= proposed_cut && c < next) next = std::min(next, c);
    }
    d.applied = next;
    d.deferred = true;
    return d;
  }

  // Unvetted mid-speech cut: double-talk until the patient yields.
  d.overlap = std::min(cfg.yield_time, tl.end - proposed_cut);
  d.clean = false;
  return d;
}

InterviewEnv::InterviewEnv(const cohort::PatientProfile& patient,
                           const EnvConfig& cfg, std::uint64_t seed,
                           std::uint64_t stream)
    : patient_(patient), cfg_(cfg), rng_(seed, stream), seed_(seed),
      stream_(stream), schedule_(quest::item_schedule()) {
  cfg_.validate();
}

Observation InterviewEnv::make_observation(const ModalityFrame& frame) {
  Observation obs;
  obs.blocks = fusion_.project(frame);
  const auto x = fusion_.pool(obs.blocks, cfg_.xf_enabled);
  x_ = x;
  for (int i = 0; i < kFusionDim; ++i) obs.s[i] = x[i];
  for (int i = 0; i < kMetricDim; ++i) obs.s[kFusionDim + i] = cfg_.weights.w[i];

  if (cfg_.cf_enabled && rng_.uniform() < cfg_.p_cf) {
    const auto cf_frame = cohort::perturb_counterfactual(frame, cfg_.cf_bounds, rng_);
    const auto x_cf = fusion_.fuse(cf_frame, cfg_.xf_enabled);
    obs.has_cf = true;
    for (int i = 0; i < kFusionDim; ++i) obs.s_cf[i] = x_cf[i];
    for (int i = 0; i < kMetricDim; ++i) obs.s_cf[kFusionDim + i] = cfg_.weights.w[i];
  }
  return obs;
}

Observation InterviewEnv::reset() {
  cfg_.validate();
  // Episode substreams live far above the caller's stream space.
  rng_.reseed(seed_, stream_ + (episode_counter_++ << 32));
  t_ = 0;
  done_ = false;
  answered_.fill(false);
  confidence_.fill(0.0);
  likert_.fill(-1);
  clarifies_.fill(0);
  topic_counts_.fill(0);
  topic_dwell_.fill(0.0);
  delivered_ = 0;
  rapport_sum_ = 0;
  summary_ = {};

  auto tf = cohort::emit_neutral_features(patient_, rng_);
  if (cfg_.dropout_p > 0)
    tf.frame = cohort::mask_modalities(tf.frame, cfg_.dropout_p, rng_);
  return make_observation(tf.frame);
}

StepResult InterviewEnv::step(const Action& action_in, double agent_uncertainty) {
  if (done_) throw state_error("env: step after episode end");
  const Action a = clamp_action(action_in, cfg_.bounds);
  const double u_turn = clamp01(agent_uncertainty);
  const quest::ItemId item = schedule_[t_];
  const int topic = topic_of(item);

  StepResult res;
  res.item_index = t_;

  // Patient answers the mandatory item.
  auto tf = cohort::emit_turn_features(patient_, item, rng_);
  if (cfg_.dropout_p > 0)
    tf.frame = cohort::mask_modalities(tf.frame, cfg_.dropout_p, rng_);
  if (!cfg_.pr_enabled) {
    // Prosody features removed: jitter/energy/voicing slots go dark.
    tf.frame.speech[cohort::kSpeechJitter] = 0.0;
    tf.frame.speech[3] = 0.0;
    tf.frame.speech[6] = 0.0;
  }
  const double kappa_speech = tf.frame.kappa[0];

  UtteranceTimeline tl;
  tl.start = patient_.base_latency * (0.9 + 0.2 * rng_.uniform());
  tl.end = tl.start + tf.utterance_duration;
  tl.pause_halfwidth = cfg_.pause_halfwidth;
  tl.answer_ready = tl.start + cfg_.answer_ready_frac * tf.utterance_duration;
  {
    const int n_pauses = std::min(
        4, 1 + static_cast<int>(rng_.uniform() * (1.0 + 3.0 * patient_.pause_rate)));
    for (int i = 0; i < n_pauses; ++i)
      tl.pause_centers.push_back(tl.start +
                                 tf.utterance_duration * rng_.uniform(0.15, 0.9));
    std::sort(tl.pause_centers.begin(), tl.pause_centers.end());
  }

  // End-of-utterance detection: noisier without reliable speech or prosody.
  double sigma_det = cfg_.sigma_det0 + cfg_.sigma_det1 * (1.0 - kappa_speech);
  if (!cfg_.pr_enabled) sigma_det *= cfg_.pr_det_penalty;
  const bool false_end =
      rng_.uniform() < cfg_.p_false_end * (1.0 - 0.5 * kappa_speech) &&
      !tl.pause_centers.empty();
  const double detected_end =
      false_end
          ? tl.pause_centers[rng_.uniform_int(tl.pause_centers.size())]
          : tl.end + std::abs(rng_.normal(0, sigma_det));

  const auto tm = turn_manager(a, u_turn, detected_end,
                               static_cast<int>(tl.pause_centers.size()), cfg_, rng_);
  const bool defer = cfg_.ua_enabled && cfg_.guardrails_enabled;
  const auto cut = safety_check(tm.proposed_cut, tl, a.interruption_tolerance, cfg_, defer);

  if (cut.deferred || !cut.clean) {
    AuditRecord rec;
    rec.turn = t_;
    rec.kind = AuditKind::Override;
    rec.proposed_cut = tm.proposed_cut;
    rec.applied_cut = cut.applied;
    rec.proposed_action = action_in.to_array();
    rec.applied_action = a.to_array();
    res.audits.push_back(rec);
  }

  // Backchannels land at pause centers with a5-dependent placement jitter.
  res.bc_total = tm.backchannels_planned;
  for (int k = 0; k < tm.backchannels_planned; ++k) {
    const double offset =
        rng_.normal(0, cfg_.sigma_bc) * (2.0 - a.immediacy_gain);
    if (std::abs(offset) <= tl.pause_halfwidth) res.bc_inside++;
    AuditRecord rec;
    rec.turn = t_;
    rec.kind = AuditKind::BackchannelInjected;
    rec.proposed_cut = rec.applied_cut =
        tl.pause_centers.empty() ? tl.end : tl.pause_centers[k % tl.pause_centers.size()];
    rec.proposed_action = action_in.to_array();
    rec.applied_action = a.to_array();
    res.audits.push_back(rec);
  }

  // Disengagement: the reply gap missed this patient's preferred pacing.
  // Slow replies wear anyone down; quick ones only bother slowed (severe)
  // patients, who need space. Pause handovers are exempt here, their cost
  // is the content they truncate. The safety layer falls back on a skip.
  const double severity = patient_.severity();
  const double pace_target =
      cfg_.pace_target_base + cfg_.pace_target_sev * severity;
  const double silence_wait = cut.applied - tl.end;
  res.skipped = false;
  if (silence_wait >= 0) {
    const double deviation = silence_wait - pace_target;
    const double slope =
        deviation < 0 ? cfg_.disengage_slope * severity : cfg_.disengage_slope;
    const double bc_bonus = std::clamp(
        cfg_.bc_grace_inside * res.bc_inside -
            cfg_.bc_grace_outside * (res.bc_total - res.bc_inside),
        -cfg_.disengage_grace + 0.5, cfg_.bc_grace_cap);
    const double grace = cfg_.disengage_grace + bc_bonus;
    const double excess = std::max(0.0, std::abs(deviation) - grace);
    const double p_skip = std::min(cfg_.disengage_cap, slope * excess);
    res.skipped = rng_.uniform() < p_skip;
  }

  double wall = 0;
  double clarify_cost = 0;

  if (res.skipped) {
    const double disengage = cut.applied;
    res.wait_raw = std::max(0.0, disengage - tl.end);
    res.latency_raw = res.wait_raw;
    res.clean_cut = true;
    wall = disengage + 8.0;
    AuditRecord rec;
    rec.turn = t_;
    rec.kind = AuditKind::TimeoutFallback;
    rec.proposed_cut = tm.proposed_cut;
    rec.applied_cut = disengage;
    rec.proposed_action = action_in.to_array();
    rec.applied_action = a.to_array();
    res.audits.push_back(rec);
  } else {
    // Captured answer quality depends on how much of it the agent heard.
    const double yield_point =
        cut.clean ? std::min(tl.end, cut.applied)
                  : std::min(tl.end, cut.applied + cut.overlap);
    const double spoken = std::max(0.0, yield_point - tl.start);
    const double q =
        clamp01(spoken / std::max(1e-9, cfg_.answer_ready_frac * tf.utterance_duration));
    const double f_eff =
        clamp01(cfg_.fidelity * (0.7 + 0.3 * q) * (0.92 + 0.08 * kappa_speech));
    const int latent = item.instrument == quest::Instrument::PHQ8
                           ? patient_.phq8_latent[item.index - 1]
                           : patient_.pclc_latent[item.index - 1];
    const auto interp = quest::interpret_answer(item.instrument, latent, rng_, f_eff);
    answered_[t_] = true;
    likert_[t_] = interp.likert;
    confidence_[t_] = interp.confidence;
    delivered_++;
    topic_counts_[topic]++;

    res.likert = interp.likert;
    res.confidence = interp.confidence;
    res.latency_raw = cut.applied - tl.end;
    res.wait_raw = std::max(0.0, res.latency_raw);
    res.overlap_raw = cut.overlap;
    res.clean_cut = cut.clean;

    // Uncertainty-aware probe: clarify the shakiest already-asked item when
    // its uncertainty beats a threshold that drops as the agent gets less
    // sure of itself.
    std::array<double, 25> probe_u{};
    for (int i = 0; i < 25; ++i)
      probe_u[i] = answered_[i] ? clamp01(1.0 - confidence_[i]) : 0.0;
    const int target = select_probe_target(probe_u);
    const double theta =
        std::max(0.02, cfg_.clarify_theta0 - cfg_.clarify_theta_slope * u_turn);
    if (target >= 0 && probe_u[target] > theta) {
      const int target_topic = topic_of(schedule_[target]);
      if (topic_dwell_[target_topic] >= cfg_.topic_dwell_caps[target_topic] &&
          cfg_.guardrails_enabled) {
        AuditRecord rec;
        rec.turn = t_;
        rec.kind = AuditKind::DwellCap;
        rec.proposed_cut = rec.applied_cut = cut.applied;
        rec.proposed_action = action_in.to_array();
        rec.applied_action = a.to_array();
        res.audits.push_back(rec);
      } else {
        res.clarified = true;
        res.unnecessary_clarify = confidence_[target] >= cfg_.unnecessary_conf;
        const quest::ItemId t_item = schedule_[target];
        const int t_latent = t_item.instrument == quest::Instrument::PHQ8
                                 ? patient_.phq8_latent[t_item.index - 1]
                                 : patient_.pclc_latent[t_item.index - 1];
        const double f_clar = clamp01(
            cfg_.fidelity + cfg_.clarify_fidelity_recovery * (1.0 - cfg_.fidelity));
        const auto again =
            quest::interpret_answer(t_item.instrument, t_latent, rng_, f_clar);
        // First accepted Likert value stays frozen; the clarification only
        // refreshes confidence and is recorded separately.
        confidence_[target] = std::max(confidence_[target], again.confidence);
        clarifies_[target]++;
        topic_counts_[target_topic]++;
        const double d_clar = patient_.utterance_scale *
                              (1.0 + cohort::item_severity(patient_, t_item)) * 0.5 *
                              std::exp(rng_.normal(0, 0.2));
        clarify_cost = 6.0 + 0.5 * tl.start + 0.5 * d_clar;
        AuditRecord rec;
        rec.turn = t_;
        rec.kind = AuditKind::Clarify;
        rec.proposed_cut = rec.applied_cut = cut.applied;
        rec.proposed_action = action_in.to_array();
        rec.applied_action = a.to_array();
        res.audits.push_back(rec);
      }
    }

    const double prompt_dur = 10.0 + 0.04 * static_cast<double>(item_text(item).size());
    wall = std::max(cut.applied, yield_point) + prompt_dur + clarify_cost;
  }

  // Dwell clamps (safety layer).
  if (cfg_.guardrails_enabled && wall > cfg_.max_dwell) {
    AuditRecord rec;
    rec.turn = t_;
    rec.kind = AuditKind::DwellCap;
    rec.proposed_cut = wall;
    rec.applied_cut = cfg_.max_dwell;
    rec.proposed_action = action_in.to_array();
    rec.applied_action = a.to_array();
    res.audits.push_back(rec);
    wall = cfg_.max_dwell;
  }
  wall = std::max(wall, cfg_.min_dwell);
  topic_dwell_[topic] += wall;
  res.turn_wall_time = wall;

  TurnTrace trace;
  trace.turn = t_;
  trace.delivered = delivered_;
  trace.a1 = a.target_latency;
  trace.a2 = a.max_wait;
  trace.latency = res.latency_raw;
  trace.overlap = res.overlap_raw;
  trace.clean_cut = res.clean_cut;
  trace.skipped = res.skipped;
  trace.unnecessary_clarifies = res.unnecessary_clarify ? 1 : 0;
  trace.bc_total = res.bc_total;
  trace.bc_inside = res.bc_inside;
  trace.topic_counts = topic_counts_;
  res.metrics = compute_metrics(trace, cfg_.bounds);
  for (auto& rec : res.audits) rec.reward_terms = res.metrics;

  res.reward = scalarize(cfg_.weights, res.metrics);
  rapport_sum_ += res.metrics.rapport;

  t_++;
  done_ = (t_ == quest::kScheduleLength);
  res.done = done_;
  if (done_) {
    finish_episode();
    if (cfg_.legacy_bonus) res.reward += summary_.legacy / 25.0;
  }

  res.obs = make_observation(tf.frame);
  return res;
}

void InterviewEnv::finish_episode() {
  const auto truth = cohort::true_screen(patient_, cfg_.phq_cutpoint, cfg_.pclc_cutpoint);
  const bool truth_dep = truth.phq8_positive;
  const bool truth_ptsd = truth.pclc_cluster_positive || truth.pclc_cutpoint_positive;

  quest::PHQ8Response phq{};
  quest::PCLCResponse pclc{};
  for (int i = 0; i < quest::kPhq8Items; ++i)
    phq.scores[i] = answered_[i] ? likert_[i] : 0;
  for (int i = 0; i < quest::kPclcItems; ++i)
    pclc.scores[i] = answered_[quest::kPhq8Items + i] ? likert_[quest::kPhq8Items + i] : 1;
  const auto pred = quest::screen(phq, pclc, cfg_.phq_cutpoint, cfg_.pclc_cutpoint);
  const bool pred_dep = pred.phq8_positive;
  const bool pred_ptsd = pred.pclc_cluster_positive || pred.pclc_cutpoint_positive;

  summary_.screen_dep_correct = (pred_dep == truth_dep);
  summary_.screen_ptsd_correct = (pred_ptsd == truth_ptsd);
  const double acc_end = 0.5 * summary_.screen_dep_correct + 0.5 * summary_.screen_ptsd_correct;
  // The no-information prior predicts both screens negative.
  const double acc_prior = 0.5 * (!truth_dep) + 0.5 * (!truth_ptsd);
  summary_.delta_acc = acc_end - acc_prior;

  int positives = 0, caught = 0;
  if (truth_dep) {
    positives++;
    caught += pred_dep;
  }
  if (truth_ptsd) {
    positives++;
    caught += pred_ptsd;
  }
  summary_.sensitivity = positives == 0 ? 1.0 : static_cast<double>(caught) / positives;
  summary_.mean_rapport = rapport_sum_ / quest::kScheduleLength;
  summary_.delivered = delivered_;
  summary_.legacy = legacy_reward(summary_.delta_acc, summary_.sensitivity,
                                  summary_.mean_rapport, cfg_.weights);
}

}  // namespace isim::env
