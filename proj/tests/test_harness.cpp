#include <cmath>

#include "doctest.h"
#include "isim/cohort/generator.hpp"
#include "isim/harness/export.hpp"
#include "isim/harness/run.hpp"
#include "isim/harness/series.hpp"
#include "isim/harness/suites.hpp"

using namespace isim;
using namespace isim::harness;

TEST_CASE("rolling_mean: constant, identity window, arithmetic oracle") {
  std::vector<double> constant(50, 3.25);
  for (double v : rolling_mean(constant, 35)) CHECK(v == doctest::Approx(3.25));

  std::vector<double> ramp;
  for (int i = 1; i <= 100; ++i) ramp.push_back(i);
  CHECK(rolling_mean(ramp, 1) == ramp);

  const auto smoothed = rolling_mean(ramp, 35);
  // mean(66..100) = 83.
  CHECK(smoothed.back() == doctest::Approx(83.0));
  // Prefix entries average what is available.
  CHECK(smoothed[0] == doctest::Approx(1.0));
  CHECK(smoothed[2] == doctest::Approx(2.0));

  // Brute-force comparison on random input.
  num::Rng rng(3, 0);
  std::vector<double> xs(200);
  for (auto& v : xs) v = rng.uniform(-5, 5);
  const auto fast = rolling_mean(xs, 17);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double acc = 0;
    const std::size_t from = i >= 16 ? i - 16 : 0;
    for (std::size_t j = from; j <= i; ++j) acc += xs[j];
    REQUIRE(std::abs(fast[i] - acc / (i - from + 1)) < 1e-12);
  }

  CHECK_THROWS_AS(rolling_mean({}, 35), shape_error);
}

TEST_CASE("delta_first_last: constant, shaped windows, monotone series") {
  std::vector<double> constant(100, 0.4);
  CHECK(delta_first_last(constant, 35) == doctest::Approx(0.0));

  // First window pinned at 0.616, last at 0.640: delta is +0.024.
  std::vector<double> shaped(120, 0.7);
  for (int i = 0; i < 35; ++i) shaped[i] = 0.616;
  for (int i = 85; i < 120; ++i) shaped[i] = 0.640;
  CHECK(delta_first_last(shaped, 35) == doctest::Approx(0.024));

  std::vector<double> rising;
  for (int i = 0; i < 90; ++i) rising.push_back(0.01 * i);
  CHECK(delta_first_last(rising, 35) > 0.0);

  CHECK_THROWS_AS(delta_first_last(std::vector<double>(69, 1.0), 35), shape_error);
}

TEST_CASE("lastn_mean: constant, full span, alternating") {
  CHECK(lastn_mean(std::vector<double>(200, 2.5), 120) == doctest::Approx(2.5));

  std::vector<double> xs = {1, 2, 3, 4};
  CHECK(lastn_mean(xs, 4) == doctest::Approx(2.5));

  std::vector<double> alt(240);
  for (int i = 0; i < 240; ++i) alt[i] = i % 2;
  CHECK(lastn_mean(alt, 120) == doctest::Approx(0.5));

  CHECK_THROWS_AS(lastn_mean(std::vector<double>(50, 1.0), 120), shape_error);

  // Brute-force equality on random data.
  num::Rng rng(5, 0);
  std::vector<double> r(300);
  for (auto& v : r) v = rng.uniform(0, 1);
  double acc = 0;
  for (int i = 180; i < 300; ++i) acc += r[i];
  REQUIRE(std::abs(lastn_mean(r, 120) - acc / 120) < 1e-12);
}

TEST_CASE("run config: round trip, unknown keys, toggle hashing, conflicts") {
  RunConfig cfg;
  cfg.agent = AgentKind::PPO;
  cfg.episodes = 123;
  cfg.seeds = {7, 8};
  cfg.dropout_p = 0.2;
  const auto parsed = parse_config_text(cfg.canonical_text());
  CHECK(parsed.hash() == cfg.hash());
  CHECK(parsed.agent == AgentKind::PPO);
  CHECK(parsed.episodes == 123);
  CHECK(parsed.seeds == cfg.seeds);

  CHECK_THROWS_AS(parse_config_text("bogus_key 1\n"), config_error);
  CHECK_THROWS_AS(parse_config_text("episodes\n"), config_error);

  // Explicitly enabling every component reproduces the base hash.
  RunConfig base;
  RunConfig toggled = base;
  toggled.cf = toggled.ua = toggled.tr = toggled.xf = toggled.pr = true;
  CHECK(toggled.hash() == base.hash());
  toggled.ua = false;
  CHECK(toggled.hash() != base.hash());

  // Modality dropout with prosody removed is a config conflict.
  RunConfig conflict;
  conflict.dropout_p = 0.2;
  conflict.pr = false;
  CHECK_THROWS_AS(conflict.validate(), config_error);

  // The TR ablation renormalizes the reward weights.
  RunConfig tr_off;
  tr_off.tr = false;
  const auto w = tr_off.env_config().weights.w;
  double sum = 0;
  for (double v : w) sum += v;
  CHECK(sum == doctest::Approx(1.0));
  CHECK(w[1] == 0.0);  // rapport unweighted
  CHECK(w[3] == 0.0);  // pace unweighted
}

namespace {

RunConfig tiny_config(AgentKind agent) {
  RunConfig cfg;
  cfg.agent = agent;
  cfg.episodes = 40;
  cfg.seeds = {1};
  cfg.cohort_n = 24;
  cfg.cohort_seed = 5;
  cfg.log_every = 10;
  cfg.td3.batch = 64;
  cfg.td3.warmup_steps = 200;
  cfg.td3.update_every = 4;
  cfg.ppo.rollout = 250;
  cfg.cem.population = 8;
  cfg.cem.iterations = 5;
  return cfg;
}

}  // namespace

TEST_CASE("train_run: determinism and series shape for every agent") {
  SUBCASE("td3") {
    const auto cfg = tiny_config(AgentKind::TD3);
    const auto a = train_run(cfg, 11);
    const auto b = train_run(cfg, 11);
    REQUIRE(a.episodes.size() == 40);
    CHECK(reward_series(a.episodes) == reward_series(b.episodes));
    CHECK(curves_csv(a) == curves_csv(b));
    CHECK(agents::checkpoint_to_text(a.final) == agents::checkpoint_to_text(b.final));
    const auto c = train_run(cfg, 12);
    CHECK(reward_series(a.episodes) != reward_series(c.episodes));
    CHECK_FALSE(a.sampled_turns.empty());
  }

  SUBCASE("single episode gives a length-one series") {
    auto cfg = tiny_config(AgentKind::TD3);
    cfg.episodes = 1;
    const auto r = train_run(cfg, 3);
    CHECK(r.episodes.size() == 1);
  }

  SUBCASE("ppo") {
    const auto cfg = tiny_config(AgentKind::PPO);
    const auto a = train_run(cfg, 21);
    const auto b = train_run(cfg, 21);
    REQUIRE(a.episodes.size() == 40);
    CHECK(reward_series(a.episodes) == reward_series(b.episodes));
  }

  SUBCASE("cem emits one entry per iteration plus the expanded axis") {
    auto cfg = tiny_config(AgentKind::CEM);
    cfg.cem.eval_episodes = 2;  // block = 8 + 2 episodes
    const auto a = train_run(cfg, 31);
    REQUIRE(a.episodes.size() == 40);
    CHECK(a.cem_iterations.size() == 4);  // 40 episodes / block 10
    // Expanded axis is piecewise constant per generation.
    for (int it = 0; it < 4; ++it)
      for (int k = 1; k < 10; ++k)
        CHECK(a.episodes[it * 10].reward == a.episodes[it * 10 + k].reward);
    const auto b = train_run(cfg, 31);
    CHECK(reward_series(a.episodes) == reward_series(b.episodes));
  }
}

TEST_CASE("evaluate_policy: deterministic and dropout-0 equals the base") {
  auto cfg = tiny_config(AgentKind::TD3);
  const auto run = train_run(cfg, 41);
  const auto patients = cohort::generate_cohort(8, 9);
  const auto ec = cfg.env_config();
  const auto e1 = evaluate_policy(cfg, run.final, patients, 8, 41, ec);
  const auto e2 = evaluate_policy(cfg, run.final, patients, 8, 41, ec);
  REQUIRE(e1.size() == 8);
  CHECK(reward_series(e1) == reward_series(e2));

  auto ec_p0 = ec;
  ec_p0.dropout_p = 0.0;
  const auto e3 = evaluate_policy(cfg, run.final, patients, 8, 41, ec_p0);
  CHECK(reward_series(e1) == reward_series(e3));

  // The full stack keeps the safety endpoints pinned even on fresh patients.
  const auto dq = decision_quality(e1, 8);
  CHECK(dq.overlap_s == doctest::Approx(0.0));
  CHECK(dq.cut_consistency_pct == doctest::Approx(100.0));
}

TEST_CASE("exports: stable bytes and header-only for empty runs") {
  const RunResult empty;
  CHECK(curves_csv(empty) ==
        "episode,reward,coverage,rapport,balance,pace,wasted_wait,latency,overlap,"
        "clarify,cut_consistency,bc_precision\n");
  const auto d = decision_csv(empty);
  CHECK(d.find('\n') == d.size() - 1);  // header only

  auto cfg = tiny_config(AgentKind::CEM);
  const auto run = train_run(cfg, 51);
  CHECK(curves_csv(run) == curves_csv(run));
  CHECK(cem_iterations_csv(run).substr(0, 9) == "iteration");
}

TEST_CASE("run_cells dispatches every cell exactly once under any job count") {
  for (int jobs : {1, 2, 4}) {
    std::vector<int> hits(37, 0);
    std::vector<std::function<void()>> cells;
    for (int i = 0; i < 37; ++i) cells.push_back([&hits, i] { hits[i]++; });
    run_cells(std::move(cells), jobs);
    for (int h : hits) CHECK(h == 1);
  }
}
