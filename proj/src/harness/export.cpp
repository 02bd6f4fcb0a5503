#include "isim/harness/export.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "isim/harness/series.hpp"

namespace isim::harness {

namespace {

void append_num(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  out += buf;
}

}  // namespace

void ensure_dir(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw io_error("cannot create directory: " + path + ": " + ec.message());
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw io_error("write failed: " + path);
}

std::string curves_csv(const RunResult& run) {
  std::string out = "episode,reward";
  for (const char* name : env::kMetricNames) {
    out += ',';
    out += name;
  }
  out += '\n';
  for (std::size_t ep = 0; ep < run.episodes.size(); ++ep) {
    out += std::to_string(ep);
    out += ',';
    append_num(out, run.episodes[ep].reward);
    for (double m : run.episodes[ep].metrics) {
      out += ',';
      append_num(out, m);
    }
    out += '\n';
  }
  return out;
}

std::string decision_csv(const RunResult& run) {
  std::string out =
      "episode,wait_raw,overlap_raw,unnecessary_clarify_rate,clean_cut_rate,"
      "bc_precision,delivered,legacy,dep_correct,ptsd_correct\n";
  for (std::size_t ep = 0; ep < run.episodes.size(); ++ep) {
    const auto& e = run.episodes[ep];
    out += std::to_string(ep);
    for (double v : {e.wait_raw, e.overlap_raw, e.unnecessary_clarify_rate,
                     e.clean_cut_rate, e.bc_precision, e.delivered, e.legacy,
                     e.dep_correct, e.ptsd_correct}) {
      out += ',';
      append_num(out, v);
    }
    out += '\n';
  }
  return out;
}

std::string cem_iterations_csv(const RunResult& run) {
  std::string out = "iteration,best_return,elite_mean_return,population_mean_return,deployed_mean_return\n";
  for (const auto& it : run.cem_iterations) {
    out += std::to_string(it.iteration);
    out += ',';
    append_num(out, it.best_return);
    out += ',';
    append_num(out, it.elite_mean_return);
    out += ',';
    append_num(out, it.population_mean_return);
    out += ',';
    append_num(out, it.deployed_mean_return);
    out += '\n';
  }
  return out;
}

void write_run_dir(const std::string& dir, const RunConfig& cfg, const RunResult& run) {
  ensure_dir(dir);
  std::string config_snapshot = cfg.canonical_text();
  config_snapshot += "hash ";
  config_snapshot += run.config_hash;
  config_snapshot += "\nseed ";
  config_snapshot += std::to_string(run.seed);
  config_snapshot += '\n';
  write_text_file(dir + "/config.txt", config_snapshot);
  write_text_file(dir + "/curves.csv", curves_csv(run));
  write_text_file(dir + "/decision.csv", decision_csv(run));
  write_text_file(dir + "/episodes.log", env::episode_log_to_text(run.sampled_turns));
  write_text_file(dir + "/audit.log", env::audit_log_to_text(run.audit_lines));
  agents::save_checkpoint(run.early, dir + "/checkpoint_early.txt");
  agents::save_checkpoint(run.final, dir + "/checkpoint_final.txt");
  if (!run.cem_iterations.empty())
    write_text_file(dir + "/cem_iterations.csv", cem_iterations_csv(run));
}

std::string comparison_csv(const ComparisonReport& report) {
  std::string out =
      "policy,reward,delta_reward,coverage,delta_coverage,rapport,delta_rapport,"
      "balance,delta_balance,pace,delta_pace\n";
  for (const auto& m : report.methods) {
    out += agent_name(m.agent);
    out += ',';
    append_num(out, median(m.per_seed_lastn_reward()));
    out += ',';
    append_num(out, median(m.per_seed_delta_reward()));
    // Metric indices: coverage 0, rapport 1, balance 2, pace 3.
    for (int metric : {0, 1, 2, 3}) {
      out += ',';
      append_num(out, median(m.per_seed_lastn(metric)));
      out += ',';
      append_num(out, median(m.per_seed_delta(metric)));
    }
    out += '\n';
  }
  return out;
}

std::string ablation_csv(const AblationReport& report) {
  std::string out =
      "variant,reward,delta_reward,coverage,rapport,rapport_seed_std,pace,"
      "overlap_raw,cut_consistency_pct,clarify_pct,bc_precision_pct\n";
  for (const auto& v : report.variants) {
    std::vector<double> lastn_reward, delta_reward, cov, rap, pace;
    std::vector<EpisodeStats> tail;
    for (const auto& r : v.runs) {
      lastn_reward.push_back(lastn_mean(reward_series(r.episodes)));
      delta_reward.push_back(delta_first_last(reward_series(r.episodes)));
      cov.push_back(lastn_mean(metric_series(r.episodes, 0)));
      rap.push_back(lastn_mean(metric_series(r.episodes, 1)));
      pace.push_back(lastn_mean(metric_series(r.episodes, 3)));
      const std::size_t n = r.episodes.size();
      const std::size_t from = n > kLastN ? n - kLastN : 0;
      tail.insert(tail.end(), r.episodes.begin() + from, r.episodes.end());
    }
    const auto dq = decision_quality(tail, static_cast<int>(tail.size()));
    out += v.name;
    for (double x : {mean(lastn_reward), mean(delta_reward), mean(cov), mean(rap),
                     stddev(rap), mean(pace), dq.overlap_s, dq.cut_consistency_pct,
                     dq.clarify_pct, dq.bc_precision_pct}) {
      out += ',';
      append_num(out, x);
    }
    out += '\n';
  }
  return out;
}

std::string robustness_csv(const RobustnessReport& report) {
  std::string out = "section,key,value\n";
  for (const auto& d : report.dropout) {
    char key[64];
    std::snprintf(key, sizeof key, "dropout_p=%.1f", d.p);
    for (const auto& [suffix, value] :
         std::initializer_list<std::pair<const char*, double>>{
             {"overlap_s", d.dq.overlap_s},
             {"cut_consistency_pct", d.dq.cut_consistency_pct},
             {"bc_precision_pct", d.dq.bc_precision_pct},
             {"wait_s", d.dq.wait_s},
             {"mean_reward", d.mean_reward}}) {
      out += "dropout,";
      out += key;
      out += '/';
      out += suffix;
      out += ',';
      append_num(out, value);
      out += '\n';
    }
  }
  for (const auto& h : report.holdout) {
    out += "holdout,";
    out += agent_name(h.agent);
    out += "/delta_reward,";
    append_num(out, h.delta_reward);
    out += '\n';
  }
  out += "holdout,ordering_stable,";
  out += report.holdout_ordering_stable ? "1" : "0";
  out += '\n';
  for (const auto& s : report.sweep) {
    out += "sweep,phq=" + std::to_string(s.phq_cutpoint) +
           "/pclc=" + std::to_string(s.pclc_cutpoint) + ",";
    append_num(out, s.delta_td3);
    out += ';';
    append_num(out, s.delta_ppo);
    out += ';';
    append_num(out, s.delta_cem);
    out += ';';
    out += s.ordered ? "1" : "0";
    out += '\n';
  }
  out += "sweep,ordering_stable,";
  out += report.sweep_ordering_stable ? "1" : "0";
  out += '\n';
  return out;
}

}  // namespace isim::harness
