#include <cmath>

#include "doctest.h"
#include "isim/agents/cem.hpp"
#include "isim/agents/checkpoint.hpp"
#include "isim/agents/ppo.hpp"
#include "isim/agents/replay.hpp"
#include "isim/agents/td3.hpp"

using namespace isim;
using namespace isim::agents;
using env::Action;
using env::ActionBounds;

namespace {

Transition make_transition(num::Rng& rng, bool with_cf = false) {
  Transition t;
  for (auto& v : t.s) v = rng.uniform(-1, 1);
  for (int i = 10; i < 20; ++i) t.s[i] = 0.1;
  ActionBounds b;
  for (int d = 0; d < 5; ++d) t.a[d] = rng.uniform(b.lower[d], b.upper[d]);
  t.r = rng.uniform(0, 1);
  for (auto& v : t.s_next) v = rng.uniform(-1, 1);
  for (int i = 10; i < 20; ++i) t.s_next[i] = 0.1;
  t.done = rng.uniform() < 0.04;
  t.has_cf = with_cf;
  if (with_cf) {
    t.s_cf = t.s;
    for (int i = 0; i < 10; ++i) t.s_cf[i] += rng.uniform(-0.05, 0.05);
  }
  for (int m = 0; m < 3; ++m) {
    t.blocks.kappa[m] = rng.uniform(0.4, 1.0);
    for (auto& z : t.blocks.z[m]) z = rng.uniform(-1, 1);
  }
  return t;
}

}  // namespace

TEST_CASE("replay buffer: ring semantics drop the oldest records first") {
  ReplayBuffer buf(8);
  num::Rng rng(1, 0);
  for (int i = 0; i < 11; ++i) {
    auto t = make_transition(rng);
    t.r = i;
    buf.push(t);
  }
  CHECK(buf.size() == 8);
  for (int i = 0; i < 8; ++i) CHECK(buf.at(i).r == doctest::Approx(3 + i));
  CHECK_THROWS_AS(buf.at(8), shape_error);
}

TEST_CASE("actor_forward: midpoint start, saturation stays inside bounds, fuzz") {
  ActionBounds bounds;
  Td3Config cfg;
  Td3Agent agent(bounds, cfg, 5);

  std::array<double, 20> s{};
  for (auto& v : s) v = 0.3;
  const auto mid = agent.act(s);
  CHECK(mid.target_latency == doctest::Approx(17.0));
  CHECK(mid.max_wait == doctest::Approx(6.0));
  CHECK(mid.backchannel_rate == doctest::Approx(0.625));
  CHECK(mid.interruption_tolerance == doctest::Approx(0.35));
  CHECK(mid.immediacy_gain == doctest::Approx(1.0));

  // Saturate the head: actions approach but never exceed the bounds.
  auto& actor = agent.actor();
  for (auto& p : actor.params()) p = 40.0;
  num::Rng rng(7, 1);
  for (int i = 0; i < 100; ++i) {
    for (auto& v : s) v = rng.uniform(-2, 2);
    const auto a = agent.act(s).to_array();
    for (int d = 0; d < 5; ++d) {
      CHECK(a[d] > bounds.lower[d]);
      CHECK(a[d] <= bounds.upper[d]);
    }
  }

  // Arbitrary weights can saturate the head; the action still never leaves
  // the box (equality only at full saturation).
  Td3Agent fresh(bounds, cfg, 99);
  for (auto& p : fresh.actor().params()) p = rng.uniform(-2, 2);
  for (int i = 0; i < 10000; ++i) {
    for (auto& v : s) v = rng.uniform(-3, 3);
    const auto a = fresh.act(s).to_array();
    for (int d = 0; d < 5; ++d) {
      CHECK(a[d] >= bounds.lower[d]);
      CHECK(a[d] <= bounds.upper[d]);
    }
  }

  // At fan-in init scale the head cannot saturate: strict interior.
  Td3Agent tame(bounds, cfg, 123);
  for (int i = 0; i < 1000; ++i) {
    for (auto& v : s) v = rng.uniform(-1, 1);
    const auto a = tame.act(s).to_array();
    for (int d = 0; d < 5; ++d) {
      CHECK(a[d] > bounds.lower[d]);
      CHECK(a[d] < bounds.upper[d]);
    }
  }
}

TEST_CASE("select_action: exploration noise scales with the bound ranges") {
  ActionBounds bounds;
  Td3Config cfg;
  Td3Agent agent(bounds, cfg, 21);
  std::array<double, 20> s{};

  const auto det = agent.act(s).to_array();
  // sigma = 0 reduces to the deterministic output.
  Td3Config quiet = cfg;
  quiet.explore_sigma = 0.0;
  Td3Agent silent(bounds, quiet, 21);
  const auto still = silent.act_explore(s).to_array();
  const auto base = silent.act(s).to_array();
  for (int d = 0; d < 5; ++d) CHECK(still[d] == base[d]);

  std::array<double, 5> sq{};
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto a = agent.act_explore(s).to_array();
    for (int d = 0; d < 5; ++d) {
      const double diff = a[d] - det[d];
      sq[d] += diff * diff;
    }
  }
  for (int d = 0; d < 5; ++d) {
    const double stddev = std::sqrt(sq[d] / n);
    const double expected = cfg.explore_sigma * bounds.range(d);
    CHECK(stddev == doctest::Approx(expected).epsilon(0.05));
  }
}

TEST_CASE("td3_targets: terminal masking, hand formula, zero-noise identity") {
  ActionBounds bounds;
  Td3Config cfg;
  num::Rng rng(3, 3);

  auto actor = [&](const std::array<double, 20>&) {
    Action a;
    a.target_latency = 12.0;
    a.max_wait = 4.0;
    a.backchannel_rate = 0.5;
    a.interruption_tolerance = 0.2;
    a.immediacy_gain = 1.0;
    return a;
  };

  SUBCASE("terminal transitions ignore the bootstrap") {
    Transition t;
    t.r = 0.7;
    t.done = true;
    auto q = [](const std::array<double, 20>&, const Action&) { return 123.0; };
    const auto y = td3_targets({t}, actor, q, q, bounds, cfg, rng);
    CHECK(y[0] == doctest::Approx(0.7));
  }

  SUBCASE("pessimistic bootstrap uses the smaller critic") {
    Transition t;
    t.r = 0.5;
    t.done = false;
    auto q1 = [](const std::array<double, 20>&, const Action&) { return 1.0; };
    auto q2 = [](const std::array<double, 20>&, const Action&) { return 0.8; };
    const auto y = td3_targets({t}, actor, q1, q2, bounds, cfg, rng);
    CHECK(y[0] == doctest::Approx(0.5 + 0.985 * 0.8));
    // Swapping the critics changes nothing (min is symmetric).
    const auto y2 = td3_targets({t}, actor, q2, q1, bounds, cfg, rng);
    CHECK(y2[0] == doctest::Approx(y[0]));
  }

  SUBCASE("zero smoothing noise evaluates the target action exactly") {
    Td3Config noiseless = cfg;
    noiseless.target_sigma = 0.0;
    Transition t;
    t.r = 0.0;
    t.done = false;
    // Critic echoes a1 so the smoothed action is observable.
    auto probe = [](const std::array<double, 20>&, const Action& a) {
      return a.target_latency;
    };
    const auto y = td3_targets({t}, actor, probe, probe, bounds, noiseless, rng);
    CHECK(y[0] == doctest::Approx(0.985 * 12.0));
  }

  SUBCASE("smoothing noise is clipped to +-c per dimension") {
    Td3Config wide = cfg;
    wide.target_sigma = 5.0;  // force the clip to bind
    Transition t;
    t.done = false;
    double max_dev = 0;
    auto probe = [&](const std::array<double, 20>&, const Action& a) {
      max_dev = std::max(max_dev, std::abs(a.target_latency - 12.0));
      return 0.0;
    };
    td3_targets(std::vector<Transition>(200, t), actor, probe, probe, bounds, wide,
                rng);
    CHECK(max_dev <= wide.target_clip * bounds.range(0) + 1e-12);
    CHECK(max_dev > 0.9 * wide.target_clip * bounds.range(0));
  }

  SUBCASE("pessimism: y never exceeds either single-critic bootstrap") {
    std::vector<Transition> batch;
    for (int i = 0; i < 64; ++i) batch.push_back(make_transition(rng));
    auto q1 = [&](const std::array<double, 20>& s, const Action& a) {
      return std::sin(s[0] * 3 + a.max_wait);
    };
    auto q2 = [&](const std::array<double, 20>& s, const Action& a) {
      return std::cos(s[1] * 2) + 0.1 * a.backchannel_rate;
    };
    num::Rng r1(9, 9), r2(9, 9), r3(9, 9);
    const auto y = td3_targets(batch, actor, q1, q2, bounds, cfg, r1);
    const auto y1 = td3_targets(batch, actor, q1, q1, bounds, cfg, r2);
    const auto y2 = td3_targets(batch, actor, q2, q2, bounds, cfg, r3);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      CHECK(y[i] <= y1[i] + 1e-12);
      CHECK(y[i] <= y2[i] + 1e-12);
    }
  }
}

TEST_CASE("td3 update: cadence, tau=0 freeze, zero-drift counterfactuals") {
  ActionBounds bounds;
  Td3Config cfg;
  cfg.batch = 32;
  cfg.warmup_steps = 0;
  cfg.update_every = 1;
  num::Rng rng(11, 0);

  SUBCASE("underfull buffer is a no-op") {
    Td3Agent agent(bounds, cfg, 1);
    const auto rep = agent.update();
    CHECK_FALSE(rep.updated);
    CHECK(agent.update_calls() == 0);
  }

  SUBCASE("actor updates every policy_delay-th call") {
    Td3Agent agent(bounds, cfg, 2);
    for (int i = 0; i < 40; ++i) agent.observe(make_transition(rng));
    for (int i = 0; i < 7; ++i) agent.update();
    CHECK(agent.update_calls() == 7);
    CHECK(agent.actor_updates() == 3);  // floor(7 / 2)

    // Two consecutive calls: critics twice, actor once.
    Td3Agent two(bounds, cfg, 3);
    for (int i = 0; i < 40; ++i) two.observe(make_transition(rng));
    two.update();
    two.update();
    CHECK(two.update_calls() == 2);
    CHECK(two.actor_updates() == 1);
  }

  SUBCASE("tau = 0 leaves every target untouched") {
    Td3Config frozen = cfg;
    frozen.tau = 0.0;
    Td3Agent agent(bounds, frozen, 4);
    for (int i = 0; i < 40; ++i) agent.observe(make_transition(rng));
    const std::vector<double> a0(agent.target_actor().params().begin(),
                                 agent.target_actor().params().end());
    const std::vector<double> q0(agent.target_critic1().params().begin(),
                                 agent.target_critic1().params().end());
    agent.update();
    agent.update();
    CHECK(std::equal(a0.begin(), a0.end(), agent.target_actor().params().begin()));
    CHECK(std::equal(q0.begin(), q0.end(), agent.target_critic1().params().begin()));
  }

  SUBCASE("counterfactual loss vanishes when the variant equals the state") {
    Td3Agent agent(bounds, cfg, 5);
    for (int i = 0; i < 40; ++i) {
      auto t = make_transition(rng, true);
      t.s_cf = t.s;
      agent.observe(t);
    }
    agent.update();
    const auto rep = agent.update();  // actor pass happens here
    CHECK(rep.actor_updated);
    CHECK(rep.cf_loss == doctest::Approx(0.0));
  }

  SUBCASE("identical seeds and data give identical parameters") {
    Td3Agent a(bounds, cfg, 6), b(bounds, cfg, 6);
    num::Rng feed1(12, 1), feed2(12, 1);
    for (int i = 0; i < 40; ++i) {
      a.observe(make_transition(feed1));
      b.observe(make_transition(feed2));
    }
    for (int i = 0; i < 4; ++i) {
      a.update();
      b.update();
    }
    const auto pa = a.actor().params();
    const auto pb = b.actor().params();
    CHECK(std::equal(pa.begin(), pa.end(), pb.begin()));
    const auto qa = a.critic1().params();
    const auto qb = b.critic1().params();
    CHECK(std::equal(qa.begin(), qa.end(), qb.begin()));
  }
}

TEST_CASE("gae: terminal single step, lambda=0, brute-force oracle") {
  SUBCASE("single terminal step masks the bootstrap") {
    const auto [adv, ret] = gae({1.0}, {0.4, 0.0}, {true}, 0.985, 0.92);
    CHECK(adv[0] == doctest::Approx(0.6));
    CHECK(ret[0] == doctest::Approx(1.0));
  }

  SUBCASE("lambda = 0 reduces to the TD residual") {
    num::Rng rng(13, 0);
    std::vector<double> r(6), v(7);
    std::vector<bool> d(6, false);
    for (auto& x : r) x = rng.uniform(-1, 1);
    for (auto& x : v) x = rng.uniform(-1, 1);
    d[5] = true;
    const auto [adv, ret] = gae(r, v, d, 0.985, 0.0);
    for (int t = 0; t < 6; ++t) {
      const double mask = d[t] ? 0.0 : 1.0;
      CHECK(adv[t] == doctest::Approx(r[t] + 0.985 * mask * v[t + 1] - v[t]));
    }
  }

  SUBCASE("recursion equals the explicit discounted sum on random sequences") {
    num::Rng rng(14, 0);
    for (int trial = 0; trial < 1000; ++trial) {
      const int T = 10;
      std::vector<double> r(T), v(T + 1);
      std::vector<bool> d(T);
      for (auto& x : r) x = rng.uniform(-1, 1);
      for (auto& x : v) x = rng.uniform(-1, 1);
      for (int t = 0; t < T; ++t) d[t] = rng.uniform() < 0.15;
      const double gamma = rng.uniform(0.9, 0.999);
      const double lambda = rng.uniform(0.0, 1.0);
      const auto [adv, ret] = gae(r, v, d, gamma, lambda);
      // Oracle: explicit sum of discounted deltas, truncated at dones.
      for (int t = 0; t < T; ++t) {
        double expect = 0, scale = 1;
        for (int k = t; k < T; ++k) {
          const double mask = d[k] ? 0.0 : 1.0;
          expect += scale * (r[k] + gamma * mask * v[k + 1] - v[k]);
          if (d[k]) break;
          scale *= gamma * lambda;
        }
        REQUIRE(std::abs(adv[t] - expect) < 1e-10);
      }
    }
  }

  CHECK_THROWS_AS(gae({1.0}, {0.0}, {false}, 0.9, 0.9), shape_error);
}

TEST_CASE("ppo: objective branches, zero-advantage stillness, bounded actions") {
  SUBCASE("ratio 1 makes both branches equal") {
    const auto [s1, s2] = ppo_objective_terms(1.0, 0.7, 0.2);
    CHECK(s1 == doctest::Approx(s2));
  }

  SUBCASE("positive advantage at ratio 2 clips to 1.2 * A") {
    const auto [s1, s2] = ppo_objective_terms(2.0, 0.5, 0.2);
    CHECK(s2 == doctest::Approx(1.2 * 0.5));
    CHECK(std::min(s1, s2) == doctest::Approx(0.6));
  }

  SUBCASE("no entropy bonus and zero advantages leave the policy unchanged") {
    ActionBounds bounds;
    PpoConfig cfg;
    cfg.rollout = 50;
    cfg.minibatch = 25;
    cfg.entropy_coef = 0.0;
    PpoAgent agent(bounds, cfg, 31);
    const std::vector<double> before(agent.policy().params().begin(),
                                     agent.policy().params().end());
    const auto ls_before = agent.log_std();
    num::Rng rng(15, 0);
    PpoLossReport rep;
    int t = 0;
    while (!rep.updated) {
      auto ar = agent.act(
          [&] {
            std::array<double, 20> s{};
            for (auto& v : s) v = rng.uniform(-1, 1);
            return s;
          }(),
          t % 25);
      ar.sample.reward = 0.0;
      ar.sample.value = 0.0;  // zero values and rewards: all deltas vanish
      ar.sample.done = (++t % 25) == 0;
      rep = agent.record(ar.sample);
    }
    CHECK(std::equal(before.begin(), before.end(), agent.policy().params().begin()));
    CHECK(agent.log_std() == ls_before);
  }

  SUBCASE("executed actions are always inside the bounds") {
    ActionBounds bounds;
    PpoConfig cfg;
    PpoAgent agent(bounds, cfg, 32);
    num::Rng rng(16, 0);
    for (int i = 0; i < 5000; ++i) {
      std::array<double, 20> s{};
      for (auto& v : s) v = rng.uniform(-2, 2);
      const auto a = agent.act(s, i % 25).action.to_array();
      for (int d = 0; d < 5; ++d) {
        CHECK(a[d] >= bounds.lower[d]);
        CHECK(a[d] <= bounds.upper[d]);
      }
    }
    CHECK(agent.uncertainty() >= 0.0);
    CHECK(agent.uncertainty() <= 1.0);
  }
}

TEST_CASE("cem: elite count, degenerate population, sort oracle") {
  ActionBounds bounds;
  CemConfig cfg;
  num::Rng rng(17, 0);

  SUBCASE("64 candidates keep the top 16") {
    auto state = cem_init(bounds, cfg);
    const auto it = cem_iterate(
        state, [](const Action& a, int) { return a.target_latency; }, bounds, cfg,
        rng);
    CHECK(it.elite_indices.size() == 16);
    CHECK(it.candidates.size() == 64);
  }

  SUBCASE("identical candidates keep the mean and floor the variance") {
    auto state = cem_init(bounds, cfg);
    state.var.fill(0.0);
    const auto it = cem_iterate(
        state, [](const Action&, int) { return 1.0; }, bounds, cfg, rng);
    for (int d = 0; d < 5; ++d) {
      CHECK(it.state.mean[d] == doctest::Approx(state.mean[d]));
      CHECK(it.state.var[d] ==
            doctest::Approx(cfg.var_floor_frac * bounds.range(d) * bounds.range(d)));
    }
  }

  SUBCASE("elite sets match an independent full sort on 1000 populations") {
    for (int trial = 0; trial < 1000; ++trial) {
      auto state = cem_init(bounds, cfg);
      std::vector<double> returns;
      const auto it = cem_iterate(
          state,
          [&](const Action&, int) {
            // Coarse grid forces plenty of ties.
            const double r = std::floor(rng.uniform(0, 8));
            returns.push_back(r);
            return r;
          },
          bounds, cfg, rng);
      // Oracle: sort indices by (-return, index).
      std::vector<int> idx(returns.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
      std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (returns[a] != returns[b]) return returns[a] > returns[b];
        return a < b;
      });
      for (int e = 0; e < 16; ++e) REQUIRE(it.elite_indices[e] == idx[e]);
    }
  }

  SUBCASE("candidates always live inside the bounds") {
    auto state = cem_init(bounds, cfg);
    state.var.fill(100.0);
    const auto it = cem_iterate(
        state, [](const Action&, int) { return 0.0; }, bounds, cfg, rng);
    for (const auto& c : it.candidates)
      for (int d = 0; d < 5; ++d) {
        CHECK(c[d] >= bounds.lower[d]);
        CHECK(c[d] <= bounds.upper[d]);
      }
  }
}

TEST_CASE("checkpoints: bit-exact round trip for every agent kind") {
  ActionBounds bounds;

  SUBCASE("td3") {
    Td3Config cfg;
    cfg.batch = 16;
    cfg.warmup_steps = 0;
    cfg.update_every = 1;
    Td3Agent agent(bounds, cfg, 41);
    num::Rng rng(18, 0);
    for (int i = 0; i < 20; ++i) agent.observe(make_transition(rng));
    agent.update();
    agent.update();

    const auto ck = td3_checkpoint(agent, "abc123");
    const auto text = checkpoint_to_text(ck);
    const auto back = checkpoint_from_text(text);
    CHECK(checkpoint_to_text(back) == text);

    Td3Agent restored(bounds, cfg, 999);
    td3_restore(restored, back);
    CHECK(std::equal(agent.actor().params().begin(), agent.actor().params().end(),
                     restored.actor().params().begin()));
    CHECK(std::equal(agent.target_critic2().params().begin(),
                     agent.target_critic2().params().end(),
                     restored.target_critic2().params().begin()));
    CHECK(restored.critic1_opt().steps() == agent.critic1_opt().steps());
    CHECK(restored.update_calls() == agent.update_calls());
    // Same state, same action.
    std::array<double, 20> s{};
    for (auto& v : s) v = 0.17;
    CHECK(agent.act(s).to_array() == restored.act(s).to_array());
  }

  SUBCASE("ppo") {
    PpoConfig cfg;
    PpoAgent agent(bounds, cfg, 42);
    const auto ck = ppo_checkpoint(agent, "ff00");
    const auto text = checkpoint_to_text(ck);
    PpoAgent restored(bounds, cfg, 1);
    ppo_restore(restored, checkpoint_from_text(text));
    CHECK(std::equal(agent.policy().params().begin(), agent.policy().params().end(),
                     restored.policy().params().begin()));
    CHECK(agent.log_std() == restored.log_std());
  }

  SUBCASE("cem") {
    CemState state;
    state.mean = {11, 4, 0.5, 0.1, 0.9};
    state.var = {1, 0.5, 0.01, 0.004, 0.001};
    const auto ck = cem_checkpoint(state, 17, "77");
    int iter = 0;
    const auto back = cem_restore(checkpoint_from_text(checkpoint_to_text(ck)), &iter);
    CHECK(iter == 17);
    CHECK(back.mean == state.mean);
    CHECK(back.var == state.var);
  }
}
