#include <cmath>

#include "doctest.h"
#include "isim/cohort/generator.hpp"
#include "isim/env/episode_log.hpp"
#include "isim/env/interview_env.hpp"

using namespace isim;
using namespace isim::env;

namespace {

cohort::PatientProfile test_patient(int i = 0) {
  static const auto cohort = cohort::generate_cohort(16, 1234);
  return cohort[i];
}

EnvConfig base_config() {
  EnvConfig cfg;
  return cfg;
}

Action quick_action() {
  Action a;
  a.target_latency = 10.0;
  a.max_wait = 3.0;
  a.backchannel_rate = 0.6;
  a.interruption_tolerance = 0.3;
  a.immediacy_gain = 1.1;
  return a;
}

}  // namespace

TEST_CASE("reset: 20-D state, deterministic, rejects bad weights") {
  auto cfg = base_config();
  InterviewEnv env(test_patient(), cfg, 42, 0);
  const auto obs = env.reset();
  CHECK(obs.s.size() == 20);
  // Preference weights occupy the tail of the state.
  for (int i = 0; i < 10; ++i) CHECK(obs.s[10 + i] == doctest::Approx(0.1));

  InterviewEnv env2(test_patient(), cfg, 42, 0);
  const auto obs2 = env2.reset();
  CHECK(obs.s == obs2.s);

  // Sequential resets advance to fresh episodes, but the whole sequence is
  // reproducible from (seed, stream).
  const auto obs3 = env.reset();
  const auto obs4 = env2.reset();
  CHECK(obs3.s == obs4.s);
  CHECK(obs3.s != obs.s);

  auto bad = cfg;
  bad.weights.w[0] = 0.5;  // sum != 1
  CHECK_THROWS_AS(InterviewEnv(test_patient(), bad, 42, 0), config_error);
}

TEST_CASE("step: 25 turns to done, coverage 1.0 on a clean run, then state error") {
  auto cfg = base_config();
  // A mild patient tolerates prompt pacing, so no turn can disengage.
  auto patient = test_patient(1);
  patient.phq8_latent.fill(0);
  patient.pclc_latent.fill(1);
  InterviewEnv env(patient, cfg, 7, 0);
  env.reset();
  StepResult last;
  int skips = 0;
  for (int t = 0; t < 25; ++t) {
    CHECK_FALSE(env.done());
    last = env.step(quick_action(), 0.2);
    skips += last.skipped;
  }
  CHECK(env.done());
  CHECK(last.done);
  REQUIRE(skips == 0);  // prompt timing never lets this patient disengage
  CHECK(last.metrics.coverage == doctest::Approx(1.0));
  CHECK_THROWS_AS(env.step(quick_action(), 0.0), state_error);
}

TEST_CASE("step: one-hot coverage weights make reward equal the component") {
  auto cfg = base_config();
  cfg.weights.w.fill(0.0);
  cfg.weights.w[0] = 1.0;  // coverage
  cfg.legacy_bonus = false;
  InterviewEnv env(test_patient(2), cfg, 9, 0);
  env.reset();
  for (int t = 0; t < 10; ++t) {
    const auto r = env.step(quick_action(), 0.0);
    CHECK(r.reward == doctest::Approx(r.metrics.coverage));
  }
}

TEST_CASE("full stack keeps overlap at zero and cuts clean for any policy") {
  // Structural safety property: with the turn manager and guardrails on,
  // no action can produce double-talk or an unclean cut.
  auto cfg = base_config();
  num::Rng rng(31, 2);
  for (int ep = 0; ep < 30; ++ep) {
    InterviewEnv env(test_patient(ep % 16), cfg, 100 + ep, 3);
    env.reset();
    while (!env.done()) {
      Action a;
      a.target_latency = rng.uniform(10, 24);
      a.max_wait = rng.uniform(3, 9);
      a.backchannel_rate = rng.uniform(0.4, 0.85);
      a.interruption_tolerance = rng.uniform(0.0, 0.7);
      a.immediacy_gain = rng.uniform(0.85, 1.15);
      const auto r = env.step(a, rng.uniform());
      CHECK(r.overlap_raw == 0.0);
      CHECK(r.metrics.overlap_score == 1.0);
      CHECK(r.metrics.cut_consistency == 1.0);
    }
  }
}

TEST_CASE("disabling the turn manager lets overlap and unclean cuts appear") {
  auto cfg = base_config();
  cfg.ua_enabled = false;
  double overlap_sum = 0;
  int unclean = 0;
  for (int ep = 0; ep < 40; ++ep) {
    InterviewEnv env(test_patient(ep % 16), cfg, 500 + ep, 3);
    env.reset();
    while (!env.done()) {
      const auto r = env.step(quick_action(), 0.8);
      overlap_sum += r.overlap_raw;
      unclean += !r.clean_cut;
    }
  }
  CHECK(overlap_sum > 0.0);
  CHECK(unclean > 0);
}

TEST_CASE("turn_manager: silence watchdog, backchannel gating and rate") {
  auto cfg = base_config();
  num::Rng rng(77, 1);
  Action a = quick_action();

  SUBCASE("zero uncertainty never injects backchannels") {
    for (int i = 0; i < 200; ++i) {
      const auto tm = turn_manager(a, 0.0, 50.0, 3, cfg, rng);
      CHECK(tm.backchannels_planned == 0);
    }
  }

  SUBCASE("high uncertainty injects at about a3*a5 per pause") {
    a.backchannel_rate = 0.85;
    a.immediacy_gain = 1.15;
    int injected = 0;
    const int n = 2000;
    for (int i = 0; i < n; ++i)
      injected += turn_manager(a, 1.0, 50.0, 1, cfg, rng).backchannels_planned;
    CHECK(std::abs(injected / static_cast<double>(n) - std::min(1.0, 0.85 * 1.15)) <
          0.02);
  }

  SUBCASE("proposed start never drifts more than a2 past target") {
    for (int i = 0; i < 500; ++i) {
      const auto tm = turn_manager(a, 0.0, 40.0, 0, cfg, rng);
      CHECK(tm.proposed_cut >= 40.0 + a.target_latency);
      CHECK(tm.proposed_cut <= 40.0 + a.target_latency + a.max_wait);
    }
  }
}

TEST_CASE("safety_check: after-end, deferred and unvetted cuts") {
  auto cfg = base_config();
  UtteranceTimeline tl;
  tl.start = 5;
  tl.end = 55;
  tl.pause_centers = {20, 40};
  tl.pause_halfwidth = 1.0;

  SUBCASE("cut after the end is untouched") {
    const auto d = safety_check(60.0, tl, 0.3, cfg, true);
    CHECK(d.applied == 60.0);
    CHECK(d.overlap == 0.0);
    CHECK(d.clean);
    CHECK_FALSE(d.deferred);
  }

  SUBCASE("mid-utterance cut defers to the next pause with zero overlap") {
    const auto d = safety_check(30.0, tl, 0.3, cfg, true);
    CHECK(d.applied == 40.0);
    CHECK(d.overlap == 0.0);
    CHECK(d.clean);
    CHECK(d.deferred);
  }

  SUBCASE("mid-utterance cut past the last pause defers to the end") {
    const auto d = safety_check(45.0, tl, 0.3, cfg, true);
    CHECK(d.applied == 55.0);
    CHECK(d.clean);
  }

  SUBCASE("cut inside a pause window needs no deferral") {
    const auto d = safety_check(40.5, tl, 0.3, cfg, true);
    CHECK(d.applied == 40.5);
    CHECK(d.clean);
    CHECK_FALSE(d.deferred);
  }

  SUBCASE("tolerance tail grants a graceful hand-over") {
    const auto d = safety_check(54.5, tl, 0.7, cfg, true);
    CHECK(d.applied == 54.5);
    CHECK(d.overlap == 0.0);
    CHECK(d.clean);
  }

  SUBCASE("without deferral the cut lands mid-speech and overlaps") {
    const auto d = safety_check(30.0, tl, 0.3, cfg, false);
    CHECK(d.applied == 30.0);
    CHECK(d.overlap > 0.0);
    CHECK_FALSE(d.clean);
  }
}

TEST_CASE("dwell above the cap is clamped with an audit record") {
  auto cfg = base_config();
  cfg.max_dwell = 30.0;  // far below a normal turn
  InterviewEnv env(test_patient(3), cfg, 11, 0);
  env.reset();
  const auto r = env.step(quick_action(), 0.0);
  CHECK(r.turn_wall_time == doctest::Approx(30.0));
  bool saw_cap = false;
  for (const auto& rec : r.audits) saw_cap |= (rec.kind == AuditKind::DwellCap);
  CHECK(saw_cap);
}

TEST_CASE("compute_metrics: definitional cases") {
  ActionBounds bounds;
  TurnTrace t;
  t.turn = 4;
  t.delivered = 5;
  t.a1 = 17;
  t.a2 = 6;
  t.latency = 17;  // exactly the target
  t.overlap = 0;
  t.clean_cut = true;
  t.topic_counts = {2, 1, 1, 1};
  auto m = compute_metrics(t, bounds);
  CHECK(m.coverage == doctest::Approx(5.0 / 25));
  CHECK(m.latency_score == doctest::Approx(1.0));
  CHECK(m.overlap_score == doctest::Approx(1.0));
  CHECK(m.rapport == doctest::Approx(1.0));
  CHECK(m.pace == doctest::Approx(1.0));

  t.topic_counts = {3, 3, 3, 3};
  m = compute_metrics(t, bounds);
  CHECK(m.balance == doctest::Approx(1.0));

  // Fuzzed traces stay inside [0,1] on every component.
  num::Rng rng(5, 5);
  for (int i = 0; i < 5000; ++i) {
    TurnTrace f;
    f.turn = static_cast<int>(rng.uniform_int(25));
    f.delivered = static_cast<int>(rng.uniform_int(26));
    f.a1 = rng.uniform(10, 24);
    f.a2 = rng.uniform(3, 9);
    f.latency = rng.uniform(-60, 60);
    f.overlap = rng.uniform(0, 10);
    f.clean_cut = rng.uniform() < 0.5;
    f.skipped = rng.uniform() < 0.2;
    f.unnecessary_clarifies = static_cast<int>(rng.uniform_int(3));
    f.bc_total = static_cast<int>(rng.uniform_int(5));
    f.bc_inside = f.bc_total == 0 ? 0 : static_cast<int>(rng.uniform_int(f.bc_total + 1));
    for (auto& c : f.topic_counts) c = static_cast<int>(rng.uniform_int(9));
    const auto mv = compute_metrics(f, bounds).to_array();
    for (double v : mv) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("scalarize: identities and linearity") {
  RewardWeights w;
  MetricVector m;
  m.coverage = m.rapport = m.balance = m.pace = m.wasted_wait_score =
      m.latency_score = m.overlap_score = m.clarify_score = m.cut_consistency =
          m.bc_precision = 0.5;
  CHECK(scalarize(w, m) == doctest::Approx(0.5));

  RewardWeights pace_only;
  pace_only.w.fill(0.0);
  pace_only.w[3] = 1.0;
  MetricVector mp;
  mp.pace = 0.779;
  CHECK(scalarize(pace_only, mp) == doctest::Approx(0.779));

  MetricVector zero;
  CHECK(scalarize(w, zero) == doctest::Approx(0.0));

  // Linear in both arguments.
  num::Rng rng(8, 8);
  for (int i = 0; i < 100; ++i) {
    MetricVector m1, m2;
    auto randomize = [&](MetricVector& mv) {
      mv.coverage = rng.uniform();
      mv.rapport = rng.uniform();
      mv.balance = rng.uniform();
      mv.pace = rng.uniform();
      mv.wasted_wait_score = rng.uniform();
      mv.latency_score = rng.uniform();
      mv.overlap_score = rng.uniform();
      mv.clarify_score = rng.uniform();
      mv.cut_consistency = rng.uniform();
      mv.bc_precision = rng.uniform();
    };
    randomize(m1);
    randomize(m2);
    const double alpha = rng.uniform(-2, 2);
    MetricVector mix;
    const auto a1 = m1.to_array(), a2 = m2.to_array();
    mix.coverage = a1[0] + alpha * a2[0];
    mix.rapport = a1[1] + alpha * a2[1];
    mix.balance = a1[2] + alpha * a2[2];
    mix.pace = a1[3] + alpha * a2[3];
    mix.wasted_wait_score = a1[4] + alpha * a2[4];
    mix.latency_score = a1[5] + alpha * a2[5];
    mix.overlap_score = a1[6] + alpha * a2[6];
    mix.clarify_score = a1[7] + alpha * a2[7];
    mix.cut_consistency = a1[8] + alpha * a2[8];
    mix.bc_precision = a1[9] + alpha * a2[9];
    CHECK(scalarize(w, mix) ==
          doctest::Approx(scalarize(w, m1) + alpha * scalarize(w, m2)).epsilon(1e-9));
  }
}

TEST_CASE("legacy_reward: zero weights, single term, defaults") {
  RewardWeights w;
  w.alpha = w.gamma_sens = w.rho = 0;
  CHECK(legacy_reward(0.4, 0.9, 0.7, w) == doctest::Approx(0.0));

  w.alpha = 1;
  CHECK(legacy_reward(0.2, 0.9, 0.7, w) == doctest::Approx(0.2));

  RewardWeights defaults;
  CHECK(legacy_reward(0.5, 1.0, 0.8, defaults) == doctest::Approx(0.5 + 1.0 + 0.8));
}

TEST_CASE("select_probe_target: argmax, tie to lowest index, none sentinel") {
  std::vector<double> u(25, 0.0);
  u[12] = 0.4;
  CHECK(select_probe_target(u) == 12);

  u.assign(25, 0.0);
  u[3] = 0.6;
  u[7] = 0.6;
  CHECK(select_probe_target(u) == 3);

  u.assign(25, 0.0);
  CHECK(select_probe_target(u) == -1);
}

TEST_CASE("episode determinism: same seed gives identical trajectories") {
  auto cfg = base_config();
  auto run = [&](std::uint64_t seed) {
    InterviewEnv env(test_patient(4), cfg, seed, 1);
    std::vector<double> rewards;
    auto obs = env.reset();
    std::vector<double> states(obs.s.begin(), obs.s.end());
    while (!env.done()) {
      const auto r = env.step(quick_action(), 0.3);
      rewards.push_back(r.reward);
      states.insert(states.end(), r.obs.s.begin(), r.obs.s.end());
    }
    return std::pair{rewards, states};
  };
  const auto a = run(77);
  const auto b = run(77);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
  const auto c = run(78);
  CHECK(a.first != c.first);
}

TEST_CASE("counterfactual variants appear at the configured rate") {
  auto cfg = base_config();
  InterviewEnv env(test_patient(5), cfg, 13, 0);
  env.reset();
  int with_cf = 0, total = 0;
  for (int ep = 0; ep < 40; ++ep) {
    env.reset();
    while (!env.done()) {
      const auto r = env.step(quick_action(), 0.1);
      with_cf += r.obs.has_cf;
      ++total;
    }
  }
  const double rate = with_cf / static_cast<double>(total);
  CHECK(rate > 0.18);
  CHECK(rate < 0.32);

  // CF-disabled runs never carry variants.
  cfg.cf_enabled = false;
  InterviewEnv env2(test_patient(5), cfg, 13, 0);
  env2.reset();
  while (!env2.done()) CHECK_FALSE(env2.step(quick_action(), 0.1).obs.has_cf);
}

TEST_CASE("episode log and audit trail round-trip through text") {
  std::vector<TurnRecord> turns(2);
  turns[0].episode = 3;
  turns[0].turn = 0;
  turns[0].item = "PHQ8:1";
  turns[0].likert = 2;
  turns[0].confidence = 0.92;
  turns[0].reward = 0.71;
  turns[0].s.fill(0.25);
  turns[0].a = {10, 3, 0.5, 0.2, 1.0};
  turns[0].m.fill(0.8);
  turns[0].audit_kinds = {"clarify", "backchannel-injected"};
  turns[1] = turns[0];
  turns[1].turn = 1;
  turns[1].item = "PCLC:4";
  turns[1].audit_kinds.clear();

  const auto text = episode_log_to_text(turns);
  const auto back = episode_log_from_text(text);
  REQUIRE(back.size() == 2);
  CHECK(episode_log_to_text(back) == text);
  CHECK(back[0].audit_kinds.size() == 2);
  CHECK(back[1].audit_kinds.empty());

  std::vector<AuditLine> audits = {{3, 0, "override", 41.5, 44.0}};
  const auto atext = audit_log_to_text(audits);
  const auto aback = audit_log_from_text(atext);
  REQUIRE(aback.size() == 1);
  CHECK(audit_log_to_text(aback) == atext);

  CHECK_THROWS_AS(episode_log_from_text("nope"), io_error);
  CHECK_THROWS_AS(audit_log_from_text("nope"), io_error);
}
