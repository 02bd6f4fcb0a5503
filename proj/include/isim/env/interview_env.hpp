#pragma once

#include <optional>
#include <string>
#include <vector>

#include "isim/cohort/features.hpp"
#include "isim/cohort/profile.hpp"
#include "isim/env/action.hpp"
#include "isim/env/fusion.hpp"
#include "isim/env/metrics.hpp"
#include "isim/num/rng.hpp"
#include "isim/quest/items.hpp"

namespace isim::env {

// All tunables of the turn simulation. Times are 0.1 s units.
struct EnvConfig {
  ActionBounds bounds;
  RewardWeights weights;

  // Component toggles (the ablation suite flips these).
  bool ua_enabled = true;          // uncertainty-aware turn manager
  bool guardrails_enabled = true;  // safety layer (deferral, caps, fallback)
  bool cf_enabled = true;          // counterfactual state variants
  bool xf_enabled = true;          // reliability-gated fusion
  bool pr_enabled = true;          // prosody features present

  double dropout_p = 0.0;          // per-modality masking probability
  bool legacy_bonus = true;        // add the end-of-episode shaping term
  int phq_cutpoint = 10;
  int pclc_cutpoint = 44;

  // Answer interpreter channel.
  double fidelity = 0.92;
  double clarify_fidelity_recovery = 0.4;  // clean re-ask closes this much error

  // Counterfactual sampling.
  double p_cf = 0.25;
  cohort::CounterfactualBounds cf_bounds;

  // End-of-utterance detection (the agent's endpointing model).
  double sigma_det0 = 0.5;     // detection delay noise floor
  double sigma_det1 = 3.0;     // extra noise when speech reliability drops
  double p_false_end = 0.25;   // chance to mistake a pause for the end
  double pr_det_penalty = 1.25;  // detection noise factor without prosody

  // Turn manager.
  double sigma_ready = 1.5;    // readiness jitter scale, shrunk by a5
  double fixed_latency = 17.0; // pacing target when UA is disabled
  double u_bc = 0.5;           // uncertainty threshold for backchannels
  double sigma_bc = 0.9;       // backchannel placement jitter
  int bc_per_turn_cap = 1;
  double min_dwell = 5.0;
  double max_dwell = 200.0;

  // Safety layer.
  double tol_window = 3.0;     // tail window is a4 * tol_window
  double yield_time = 2.0;     // double-talk before the patient yields
  std::array<double, 4> topic_dwell_caps{700.0, 450.0, 620.0, 450.0};

  // Patient pacing. Each patient has a preferred reply gap that grows with
  // severity; replies that land far from it on either side risk
  // disengagement (rushed mild-mannered pacing annoys the impatient,
  // pouncing on a slowed patient shuts them down). The fallback path skips
  // the item either way, so good pacing has to track the patient.
  double pause_halfwidth = 1.0;
  double answer_ready_frac = 0.7;
  double pace_target_base = 12.0;  // preferred gap: base + sev * pace_target_sev
  double pace_target_sev = 13.0;
  double disengage_grace = 3.0;    // tolerated deviation around the target
  double disengage_slope = 0.04;   // chance per time unit beyond the grace
  double disengage_cap = 0.5;
  // Backchannels landing inside pauses reassure the patient and widen the
  // pacing tolerance; stray ones narrow it. Calibrated so that emitting
  // them is near reward-neutral on average: the reassurance they buy about
  // offsets the precision they risk.
  double bc_grace_inside = 2.5;
  double bc_grace_outside = 0.5;
  double bc_grace_cap = 2.5;

  // Clarification policy: trigger when item uncertainty exceeds
  // theta0 - theta_slope * agent_uncertainty.
  double clarify_theta0 = 0.35;
  double clarify_theta_slope = 0.27;
  double unnecessary_conf = 0.9;  // clarifying above this confidence is waste

  void validate() const;
};

enum class AuditKind {
  Override,
  DwellCap,
  TimeoutFallback,
  BackchannelInjected,
  Clarify,
};

const char* audit_kind_name(AuditKind k);

struct AuditRecord {
  int turn = 0;
  AuditKind kind;
  double proposed_cut = 0;  // time units from turn start
  double applied_cut = 0;
  std::array<double, 5> proposed_action{};
  std::array<double, 5> applied_action{};
  MetricVector reward_terms;  // snapshot of the turn's metric vector
};

// Patient utterance timeline for one turn, in time units from turn start.
struct UtteranceTimeline {
  double start = 0;  // patient begins speaking
  double end = 0;    // patient finishes
  std::vector<double> pause_centers;
  double pause_halfwidth = 1.0;
  double answer_ready = 0;  // content conveyed by here
};

struct TurnManagerResult {
  double proposed_cut = 0;
  int backchannels_planned = 0;
  double readiness_jitter = 0;
};

// Timing side of the turn manager: aims for detected_end + a1, lets the
// silence watchdog force a start once the wait exceeds a2, and plans
// backchannels when the agent is uncertain. With UA disabled the pacing is
// fixed and unwatched.
TurnManagerResult turn_manager(const Action& a, double uncertainty,
                               double detected_end, int pause_opportunities,
                               const EnvConfig& cfg, num::Rng& rng);

struct CutDecision {
  double applied = 0;
  double overlap = 0;
  bool clean = true;
  bool deferred = false;
};

// Vets a proposed cut against the (env-side) utterance timeline. Cuts after
// the end, inside a pause, or within the a4 tolerance tail are clean. With
// deferral enabled an early cut moves to the next pause boundary (or the
// end); without it the cut lands mid-speech and accrues overlap until the
// patient yields.
CutDecision safety_check(double proposed_cut, const UtteranceTimeline& tl,
                         double interruption_tolerance, const EnvConfig& cfg,
                         bool defer_early_cuts);

// Observation handed to agents: s = [x || w], plus the optional
// counterfactual variant of the same state.
struct Observation {
  std::array<double, kStateDim> s{};
  bool has_cf = false;
  std::array<double, kStateDim> s_cf{};
  FusedBlocks blocks;  // modality provenance of x (reliability dropout)
};

struct StepResult {
  Observation obs;       // state after the turn
  MetricVector metrics;
  double reward = 0;
  bool done = false;
  std::vector<AuditRecord> audits;

  // Raw per-turn quantities behind the decision-quality endpoints.
  int item_index = -1;
  int likert = -1;
  double confidence = 0;
  bool skipped = false;
  bool clarified = false;
  bool unnecessary_clarify = false;
  double wait_raw = 0;      // silence past the patient end
  double overlap_raw = 0;
  double latency_raw = 0;   // applied cut minus patient end
  bool clean_cut = true;
  int bc_total = 0;
  int bc_inside = 0;
  double turn_wall_time = 0;
};

// Episode-end summary backing the legacy reward and decision endpoints.
struct EpisodeSummary {
  double delta_acc = 0;
  double sensitivity = 0;
  double mean_rapport = 0;
  double legacy = 0;
  int delivered = 0;
  bool screen_dep_correct = false;
  bool screen_ptsd_correct = false;
};

// One 25-turn interview against one synthetic patient. An instance is a
// single rollout; independent rollouts use disjoint rng streams.
class InterviewEnv {
 public:
  InterviewEnv(const cohort::PatientProfile& patient, const EnvConfig& cfg,
               std::uint64_t seed, std::uint64_t stream = 0);

  // Starts a fresh episode; the observation's x comes from a neutral
  // pre-turn frame. Re-validates the preference weights. Each reset moves
  // to the next deterministic episode substream: two envs built with the
  // same (seed, stream) replay the same episode sequence.
  Observation reset();

  // Runs turn t: delivers the t-th mandatory item, simulates the exchange,
  // applies the manager/safety pipeline and scores the turn.
  // `agent_uncertainty` in [0,1] drives backchannels and probe eagerness.
  StepResult step(const Action& action, double agent_uncertainty = 0.0);

  bool done() const { return done_; }
  int turn() const { return t_; }
  const EpisodeSummary& summary() const { return summary_; }
  const EnvConfig& config() const { return cfg_; }
  const cohort::PatientProfile& patient() const { return patient_; }

  // Per-item capture state (exposed for logs and tests).
  const std::array<bool, 25>& answered() const { return answered_; }
  const std::array<double, 25>& confidences() const { return confidence_; }
  const std::array<int, 25>& likerts() const { return likert_; }

 private:
  Observation make_observation(const cohort::ModalityFrame& frame);
  void finish_episode();

  cohort::PatientProfile patient_;
  EnvConfig cfg_;
  num::Rng rng_;
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  std::uint64_t episode_counter_ = 0;
  Fusion fusion_;
  std::vector<quest::ItemId> schedule_;

  int t_ = 0;
  bool done_ = true;  // reset() starts an episode
  std::array<double, kFusionDim> x_{};
  std::array<bool, 25> answered_{};
  std::array<double, 25> confidence_{};
  std::array<int, 25> likert_{};
  std::array<int, 25> clarifies_{};
  std::array<int, 4> topic_counts_{};
  std::array<double, 4> topic_dwell_{};
  int delivered_ = 0;
  double rapport_sum_ = 0;
  EpisodeSummary summary_;
};

// Maps an item to its balance/dwell topic: PHQ=0, B=1, C=2, D=3.
int topic_of(const quest::ItemId& item);

}  // namespace isim::env
