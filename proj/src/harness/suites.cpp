#include "isim/harness/suites.hpp"

#include <atomic>
#include <thread>

#include "isim/cohort/generator.hpp"
#include "isim/harness/series.hpp"

namespace isim::harness {

std::vector<double> MethodSummary::per_seed_delta_reward() const {
  std::vector<double> out;
  for (const auto& r : runs) out.push_back(delta_first_last(reward_series(r.episodes)));
  return out;
}

std::vector<double> MethodSummary::per_seed_lastn_reward() const {
  std::vector<double> out;
  for (const auto& r : runs) out.push_back(lastn_mean(reward_series(r.episodes)));
  return out;
}

std::vector<double> MethodSummary::per_seed_lastn(int metric) const {
  std::vector<double> out;
  for (const auto& r : runs)
    out.push_back(lastn_mean(metric_series(r.episodes, metric)));
  return out;
}

std::vector<double> MethodSummary::per_seed_delta(int metric) const {
  std::vector<double> out;
  for (const auto& r : runs)
    out.push_back(delta_first_last(metric_series(r.episodes, metric)));
  return out;
}

const MethodSummary& ComparisonReport::method(AgentKind k) const {
  for (const auto& m : methods)
    if (m.agent == k) return m;
  throw shape_error("comparison: method not present");
}

void run_cells(std::vector<std::function<void()>> cells, int jobs) {
  if (jobs <= 1) {
    for (auto& c : cells) c();
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      cells[i]();
    }
  };
  std::vector<std::thread> pool;
  const int n = std::min<int>(jobs, static_cast<int>(cells.size()));
  pool.reserve(n);
  for (int i = 0; i < n; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

ComparisonReport compare_methods(const RunConfig& base) {
  base.validate();
  ComparisonReport report;
  const AgentKind kinds[3] = {AgentKind::TD3, AgentKind::PPO, AgentKind::CEM};
  for (AgentKind k : kinds) {
    MethodSummary m;
    m.agent = k;
    m.runs.resize(base.seeds.size());
    report.methods.push_back(std::move(m));
  }

  std::vector<std::function<void()>> cells;
  for (int ki = 0; ki < 3; ++ki) {
    for (std::size_t si = 0; si < base.seeds.size(); ++si) {
      cells.push_back([&, ki, si] {
        RunConfig cfg = base;
        cfg.agent = kinds[ki];
        report.methods[ki].runs[si] = train_run(cfg, base.seeds[si]);
      });
    }
  }
  run_cells(std::move(cells), base.jobs);
  return report;
}

const AblationVariant& AblationReport::variant(const std::string& name) const {
  for (const auto& v : variants)
    if (v.name == name) return v;
  throw shape_error("ablation: variant not present: " + name);
}

AblationReport ablation_suite(const RunConfig& base,
                              const std::vector<RunResult>* full_runs) {
  AblationReport report;
  auto add = [&](const std::string& name, auto mutate) {
    AblationVariant v;
    v.name = name;
    v.cfg = base;
    v.cfg.agent = AgentKind::TD3;
    mutate(v.cfg);
    v.runs.resize(base.seeds.size());
    report.variants.push_back(std::move(v));
  };
  add("full", [](RunConfig&) {});
  add("-CF", [](RunConfig& c) { c.cf = false; });
  add("-UA", [](RunConfig& c) { c.ua = false; });
  add("-TR", [](RunConfig& c) { c.tr = false; });
  add("-XF", [](RunConfig& c) { c.xf = false; });
  add("-PR", [](RunConfig& c) { c.pr = false; });

  std::vector<std::function<void()>> cells;
  for (auto& v : report.variants) {
    if (v.name == "full" && full_runs && full_runs->size() == base.seeds.size()) {
      v.runs = *full_runs;
      continue;
    }
    for (std::size_t si = 0; si < base.seeds.size(); ++si)
      cells.push_back([&v, si, &base] { v.runs[si] = train_run(v.cfg, base.seeds[si]); });
  }
  run_cells(std::move(cells), base.jobs);
  return report;
}

namespace {

double eval_mean_reward(const std::vector<EpisodeStats>& eps) {
  return mean(reward_series(eps));
}

double eval_mean_metric(const std::vector<EpisodeStats>& eps, int metric) {
  return mean(metric_series(eps, metric));
}

}  // namespace

RobustnessReport robustness_suite(const RunConfig& base,
                                  const ComparisonReport& trained) {
  RobustnessReport report;
  const auto full = cohort::generate_cohort(base.cohort_n, base.cohort_seed);
  const auto [train_set, holdout] =
      cohort::split_holdout(full, base.holdout_fraction, base.cohort_seed);
  const int eval_eps = static_cast<int>(holdout.size());

  // (A) Modality dropout over the trained full-stack TD3 policies.
  const auto& td3 = trained.method(AgentKind::TD3);
  for (double p : {0.0, 0.2, 0.4}) {
    env::EnvConfig ec = base.env_config();
    ec.dropout_p = p;
    std::vector<EpisodeStats> all;
    for (const auto& run : td3.runs) {
      const auto eps =
          evaluate_policy(base, run.final, holdout, eval_eps, run.seed, ec);
      all.insert(all.end(), eps.begin(), eps.end());
    }
    RobustnessReport::DropoutRow row;
    row.p = p;
    row.dq = decision_quality(all, static_cast<int>(all.size()));
    row.mean_reward = eval_mean_reward(all);
    report.dropout.push_back(row);
  }

  // (B) Held-out patients: improvement of the final policy over the early
  // one, evaluated speaker-disjoint.
  const env::EnvConfig ec_base = base.env_config();
  for (const auto* m : {&trained.method(AgentKind::TD3),
                        &trained.method(AgentKind::PPO),
                        &trained.method(AgentKind::CEM)}) {
    std::vector<double> dr, dc, drap, dpace;
    for (const auto& run : m->runs) {
      const auto late =
          evaluate_policy(base, run.final, holdout, eval_eps, run.seed, ec_base);
      const auto early =
          evaluate_policy(base, run.early, holdout, eval_eps, run.seed, ec_base);
      dr.push_back(eval_mean_reward(late) - eval_mean_reward(early));
      dc.push_back(eval_mean_metric(late, 0) - eval_mean_metric(early, 0));
      drap.push_back(eval_mean_metric(late, 1) - eval_mean_metric(early, 1));
      dpace.push_back(eval_mean_metric(late, 3) - eval_mean_metric(early, 3));
    }
    report.holdout.push_back({m->agent, median(dr), median(dc), median(drap),
                              median(dpace)});
  }
  report.holdout_ordering_stable =
      report.holdout[0].delta_reward > report.holdout[1].delta_reward &&
      report.holdout[1].delta_reward > report.holdout[2].delta_reward;

  // (C) Clinical threshold sweep: the method ranking by held-out reward
  // improvement must not depend on the screening cutpoints.
  report.sweep_ordering_stable = true;
  for (int phq : {5, 10, 15, 20}) {
    for (int pclc = quest::kPclcCutpointMin; pclc <= quest::kPclcCutpointMax; ++pclc) {
      env::EnvConfig ec = base.env_config();
      ec.phq_cutpoint = phq;
      ec.pclc_cutpoint = pclc;
      RobustnessReport::SweepRow row;
      row.phq_cutpoint = phq;
      row.pclc_cutpoint = pclc;
      double deltas[3] = {0, 0, 0};
      const AgentKind kinds[3] = {AgentKind::TD3, AgentKind::PPO, AgentKind::CEM};
      for (int ki = 0; ki < 3; ++ki) {
        std::vector<double> dr;
        for (const auto& run : trained.method(kinds[ki]).runs) {
          const auto late =
              evaluate_policy(base, run.final, holdout, eval_eps, run.seed, ec);
          const auto early =
              evaluate_policy(base, run.early, holdout, eval_eps, run.seed, ec);
          dr.push_back(eval_mean_reward(late) - eval_mean_reward(early));
        }
        deltas[ki] = median(dr);
      }
      row.delta_td3 = deltas[0];
      row.delta_ppo = deltas[1];
      row.delta_cem = deltas[2];
      row.ordered = deltas[0] >= deltas[1] && deltas[1] >= deltas[2];
      report.sweep_ordering_stable &= row.ordered;
      report.sweep.push_back(row);
    }
  }
  return report;
}

}  // namespace isim::harness
