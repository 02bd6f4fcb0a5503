// isim: cohort generation, training, evaluation, ablations, robustness
// sweeps and log inspection for the simulated-interview pipeline.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "isim/cohort/generator.hpp"
#include "isim/cohort/io.hpp"
#include "isim/harness/export.hpp"
#include "isim/harness/suites.hpp"
#include "isim/quest/scoring.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace isim;
using harness::AgentKind;
using harness::RunConfig;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;
constexpr int kExitIo = 4;
constexpr int kExitNumeric = 5;

std::string default_out_root() {
  if (const char* root = std::getenv("ISIM_OUT_ROOT")) return root;
  return "runs";
}

RunConfig load_run_config(const std::string& path,
                          const std::vector<std::string>& overrides) {
  RunConfig cfg = harness::load_config(path);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw config_error("--set expects key=value, got: " + kv);
    harness::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

void configure_jobs(int jobs) {
#ifdef _OPENMP
  // Worker threads each run a full cell; keep the kernels single-threaded
  // then so the machine is not oversubscribed.
  if (jobs > 1) omp_set_num_threads(1);
#else
  (void)jobs;
#endif
}

std::string run_dir_name(const std::string& root, AgentKind agent,
                         std::uint64_t seed) {
  return root + "/" + harness::agent_name(agent) + "_seed" + std::to_string(seed);
}

int cmd_cohort(int n, std::uint64_t seed, const std::string& out) {
  const auto cohort = cohort::generate_cohort(n, seed);
  cohort::save_cohort(cohort, out);

  std::map<std::string, int> bands;
  int dep_pos = 0, ptsd_pos = 0;
  for (const auto& p : cohort) {
    const auto truth = cohort::true_screen(p);
    bands[quest::band_name(truth.phq8_band)]++;
    dep_pos += truth.phq8_positive;
    ptsd_pos += truth.pclc_cluster_positive;
  }
  std::printf("cohort: %d patients -> %s\n", n, out.c_str());
  std::printf("phq8 bands:");
  for (const auto& [name, count] : bands) std::printf(" %s=%d", name.c_str(), count);
  std::printf("\ndepression positive: %d  ptsd cluster positive: %d\n", dep_pos,
              ptsd_pos);
  return 0;
}

int cmd_train(const RunConfig& cfg, const std::string& out_root) {
  configure_jobs(cfg.jobs);
  const std::string root = cfg.out_dir.empty() ? out_root : cfg.out_dir;
  std::vector<harness::RunResult> results(cfg.seeds.size());
  std::vector<std::function<void()>> cells;
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i)
    cells.push_back([&, i] { results[i] = harness::train_run(cfg, cfg.seeds[i]); });
  harness::run_cells(std::move(cells), cfg.jobs);

  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    const auto dir = run_dir_name(root, cfg.agent, cfg.seeds[i]);
    harness::write_run_dir(dir, cfg, results[i]);
    const auto rs = harness::reward_series(results[i].episodes);
    std::printf("%s: episodes=%zu lastN=%.4f delta=%+.4f -> %s\n",
                harness::agent_name(cfg.agent), rs.size(),
                harness::lastn_mean(rs, std::min<int>(harness::kLastN,
                                                      static_cast<int>(rs.size()))),
                rs.size() >= 2 * harness::kRollingWindow
                    ? harness::delta_first_last(rs)
                    : 0.0,
                dir.c_str());
  }
  return 0;
}

int cmd_eval(const RunConfig& cfg, const std::string& checkpoint_path,
             const std::string& cohort_path, int episodes, double dropout,
             bool holdout, const std::string& out_csv) {
  const auto ck = agents::load_checkpoint(checkpoint_path);
  cohort::Cohort patients;
  if (!cohort_path.empty()) {
    patients = cohort::load_cohort(cohort_path);
  } else {
    auto full = cohort::generate_cohort(cfg.cohort_n, cfg.cohort_seed);
    auto split = cohort::split_holdout(full, cfg.holdout_fraction, cfg.cohort_seed);
    patients = holdout ? split.second : split.first;
  }
  if (patients.empty()) throw config_error("eval: empty cohort");
  if (episodes <= 0) episodes = static_cast<int>(patients.size());

  auto ec = cfg.env_config();
  ec.dropout_p = dropout;
  ec.validate();
  const auto eps = harness::evaluate_policy(cfg, ck, patients, episodes,
                                            cfg.seeds.front(), ec);
  const auto dq = harness::decision_quality(eps, static_cast<int>(eps.size()));
  const auto rewards = harness::reward_series(eps);
  std::printf("eval: kind=%s episodes=%d dropout=%.2f %s\n", ck.kind.c_str(),
              episodes, dropout, holdout ? "(held-out)" : "");
  std::printf("mean reward %.4f | wait %.2fs overlap %.2fs clarify %.1f%% "
              "cut %.1f%% bc %.1f%%\n",
              harness::mean(rewards), dq.wait_s, dq.overlap_s, dq.clarify_pct,
              dq.cut_consistency_pct, dq.bc_precision_pct);
  if (!out_csv.empty()) {
    harness::RunResult tmp;
    tmp.episodes = eps;
    harness::write_text_file(out_csv, harness::decision_csv(tmp));
    std::printf("wrote %s\n", out_csv.c_str());
  }
  return 0;
}

int cmd_ablate(const RunConfig& cfg, const std::string& out_root) {
  configure_jobs(cfg.jobs);
  const auto report = harness::ablation_suite(cfg);
  const auto csv = harness::ablation_csv(report);
  const std::string root = cfg.out_dir.empty() ? out_root : cfg.out_dir;
  harness::ensure_dir(root);
  harness::write_text_file(root + "/ablation.csv", csv);
  for (const auto& v : report.variants)
    for (const auto& run : v.runs) {
      std::string name = v.name == "full" ? std::string("full") : v.name.substr(1);
      harness::write_run_dir(root + "/ablate_" + name + "_seed" +
                                 std::to_string(run.seed),
                             v.cfg, run);
    }
  std::fputs(csv.c_str(), stdout);
  std::printf("wrote %s/ablation.csv\n", root.c_str());
  return 0;
}

harness::ComparisonReport load_trained(const RunConfig& cfg,
                                       const std::string& runs_dir) {
  harness::ComparisonReport report;
  for (AgentKind k : {AgentKind::TD3, AgentKind::PPO, AgentKind::CEM}) {
    harness::MethodSummary m;
    m.agent = k;
    for (std::uint64_t seed : cfg.seeds) {
      const auto dir = run_dir_name(runs_dir, k, seed);
      harness::RunResult r;
      r.seed = seed;
      r.early = agents::load_checkpoint(dir + "/checkpoint_early.txt");
      r.final = agents::load_checkpoint(dir + "/checkpoint_final.txt");
      m.runs.push_back(std::move(r));
    }
    report.methods.push_back(std::move(m));
  }
  return report;
}

int cmd_sweep(const RunConfig& cfg, const std::string& runs_dir,
              const std::string& out_root) {
  configure_jobs(cfg.jobs);
  harness::ComparisonReport trained;
  if (!runs_dir.empty()) {
    trained = load_trained(cfg, runs_dir);
  } else {
    std::printf("no --runs directory given; training all methods first\n");
    trained = harness::compare_methods(cfg);
  }
  const auto report = harness::robustness_suite(cfg, trained);
  const auto csv = harness::robustness_csv(report);
  const std::string root = cfg.out_dir.empty() ? out_root : cfg.out_dir;
  harness::ensure_dir(root);
  harness::write_text_file(root + "/robustness.csv", csv);

  std::printf("cutpoint sweep (delta reward, held-out):\n");
  std::printf("%6s %6s %10s %10s %10s %8s\n", "phq", "pclc", "td3", "ppo", "cem",
              "ordered");
  for (const auto& row : report.sweep)
    std::printf("%6d %6d %10.4f %10.4f %10.4f %8s\n", row.phq_cutpoint,
                row.pclc_cutpoint, row.delta_td3, row.delta_ppo, row.delta_cem,
                row.ordered ? "yes" : "NO");
  std::printf("ranking stable across grid: %s\n",
              report.sweep_ordering_stable ? "yes" : "NO");
  std::printf("wrote %s/robustness.csv\n", root.c_str());
  return 0;
}

int cmd_inspect(const std::string& log_path, const std::string& audit_path,
                int episode_filter) {
  std::ifstream in(log_path, std::ios::binary);
  if (!in) throw io_error("inspect: cannot open: " + log_path);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto turns = env::episode_log_from_text(ss.str());

  int overlap_events = 0, overrides = 0, skips = 0, clarifies = 0;
  std::map<int, int> episodes_seen;
  for (const auto& t : turns) {
    if (episode_filter >= 0 && t.episode != episode_filter) continue;
    episodes_seen[t.episode]++;
    if (t.m[6] < 1.0) overlap_events++;  // overlap component below 1
    skips += t.skipped;
    for (const auto& k : t.audit_kinds) {
      overrides += (k == "override");
      clarifies += (k == "clarify");
    }
    if (episode_filter >= 0) {
      std::printf("ep %d turn %2d %-8s likert %2d conf %.2f r %.4f%s", t.episode,
                  t.turn, t.item.c_str(), t.likert, t.confidence, t.reward,
                  t.skipped ? " [skipped]" : "");
      if (!t.audit_kinds.empty()) {
        std::printf(" audits:");
        for (const auto& k : t.audit_kinds) std::printf(" %s", k.c_str());
      }
      std::printf("\n");
    }
  }
  std::printf("episodes=%zu turns=%zu overlap_events=%d overrides=%d skips=%d "
              "clarifies=%d\n",
              episodes_seen.size(), turns.size(), overlap_events, overrides, skips,
              clarifies);

  if (!audit_path.empty()) {
    std::ifstream ain(audit_path, std::ios::binary);
    if (!ain) throw io_error("inspect: cannot open: " + audit_path);
    std::stringstream as;
    as << ain.rdbuf();
    const auto audits = env::audit_log_from_text(as.str());
    std::map<std::string, int> by_kind;
    for (const auto& a : audits)
      if (episode_filter < 0 || a.episode == episode_filter) by_kind[a.kind]++;
    std::printf("audit events:");
    for (const auto& [k, n] : by_kind) std::printf(" %s=%d", k.c_str(), n);
    std::printf("\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulated clinical-interview training pipeline"};
  app.require_subcommand(1);

  // cohort
  auto* cohort_cmd = app.add_subcommand("cohort", "generate a synthetic cohort file");
  int n = 276;
  std::uint64_t cohort_seed = 1;
  std::string cohort_out = "cohort.txt";
  cohort_cmd->add_option("--n", n, "number of patients");
  cohort_cmd->add_option("--seed", cohort_seed, "generator seed");
  cohort_cmd->add_option("--out", cohort_out, "output path");

  // shared config options
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_root = default_out_root();

  auto add_config_opts = [&](CLI::App* cmd, bool required = true) {
    auto* opt = cmd->add_option("--config", config_path, "run config file");
    if (required) opt->required();
    cmd->add_option("--set", overrides, "override a config key (key=value)");
    cmd->add_option("--out", out_root, "output root directory");
  };

  auto* train_cmd = app.add_subcommand("train", "train one agent across seeds");
  add_config_opts(train_cmd);

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  add_config_opts(eval_cmd);
  std::string checkpoint_path, eval_cohort, eval_csv;
  int eval_episodes = 0;
  double eval_dropout = 0.0;
  bool eval_holdout = false;
  eval_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
  eval_cmd->add_option("--cohort", eval_cohort, "cohort file (default: generated)");
  eval_cmd->add_option("--episodes", eval_episodes, "episodes (default: cohort size)");
  eval_cmd->add_option("--dropout", eval_dropout, "modality dropout probability");
  eval_cmd->add_flag("--holdout", eval_holdout, "evaluate on the held-out split");
  eval_cmd->add_option("--csv", eval_csv, "write per-episode decision csv");

  auto* ablate_cmd = app.add_subcommand("ablate", "full stack vs single-component removals");
  add_config_opts(ablate_cmd);

  auto* sweep_cmd = app.add_subcommand("sweep", "robustness suite and cutpoint sweep");
  add_config_opts(sweep_cmd);
  std::string runs_dir;
  sweep_cmd->add_option("--runs", runs_dir, "directory with trained run outputs");

  auto* inspect_cmd = app.add_subcommand("inspect", "pretty-print an episode log");
  std::string log_path, audit_path;
  int episode_filter = -1;
  inspect_cmd->add_option("--log", log_path, "episodes.log path")->required();
  inspect_cmd->add_option("--audit", audit_path, "audit.log path");
  inspect_cmd->add_option("--episode", episode_filter, "print turns of one episode");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (cohort_cmd->parsed()) {
      if (n < 1) throw config_error("cohort: --n must be >= 1");
      return cmd_cohort(n, cohort_seed, cohort_out);
    }
    if (train_cmd->parsed())
      return cmd_train(load_run_config(config_path, overrides), out_root);
    if (eval_cmd->parsed())
      return cmd_eval(load_run_config(config_path, overrides), checkpoint_path,
                      eval_cohort, eval_episodes, eval_dropout, eval_holdout,
                      eval_csv);
    if (ablate_cmd->parsed())
      return cmd_ablate(load_run_config(config_path, overrides), out_root);
    if (sweep_cmd->parsed())
      return cmd_sweep(load_run_config(config_path, overrides), runs_dir, out_root);
    if (inspect_cmd->parsed()) return cmd_inspect(log_path, audit_path, episode_filter);
  } catch (const config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid argument: %s\n", e.what());
    return kExitConfig;
  } catch (const io_error& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitIo;
  } catch (const numeric_error& e) {
    std::fprintf(stderr, "numeric fault: %s\n", e.what());
    return kExitNumeric;
  }
  return kExitUsage;
}
