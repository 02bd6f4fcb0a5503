#include "isim/harness/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "isim/errors.hpp"

namespace isim::harness {

const char* agent_name(AgentKind k) {
  switch (k) {
    case AgentKind::TD3: return "td3";
    case AgentKind::PPO: return "ppo";
    case AgentKind::CEM: return "cem";
  }
  return "?";
}

AgentKind agent_from_name(const std::string& name) {
  if (name == "td3" || name == "TD3") return AgentKind::TD3;
  if (name == "ppo" || name == "PPO") return AgentKind::PPO;
  if (name == "cem" || name == "CEM") return AgentKind::CEM;
  throw config_error("unknown agent kind: " + name);
}

void RunConfig::validate() const {
  if (episodes < 1) throw config_error("config: episodes must be >= 1");
  if (seeds.empty()) throw config_error("config: at least one seed");
  if (cohort_n < 1) throw config_error("config: cohort_n must be >= 1");
  if (log_every < 1) throw config_error("config: log_every must be >= 1");
  if (jobs < 1) throw config_error("config: jobs must be >= 1");
  if (holdout_fraction <= 0 || holdout_fraction >= 1)
    throw config_error("config: holdout_fraction in (0,1)");
  env_config().validate();
}

env::EnvConfig RunConfig::env_config() const {
  env::EnvConfig e;
  e.ua_enabled = ua;
  e.cf_enabled = cf;
  e.xf_enabled = xf;
  e.pr_enabled = pr;
  e.dropout_p = dropout_p;
  e.phq_cutpoint = phq_cutpoint;
  e.pclc_cutpoint = pclc_cutpoint;
  if (!tr) {
    // Drop the trust/rapport block: rapport, pace and the timing composites
    // stop being rewarded; the remaining objectives are renormalized.
    e.weights.w = {0.2, 0.0, 0.2, 0.0, 0.2, 0.0, 0.0, 0.2, 0.2, 0.0};
  }
  return e;
}

std::string RunConfig::canonical_text() const {
  std::string out;
  char buf[64];
  auto kv = [&](const char* k, const std::string& v) {
    out += k;
    out += ' ';
    out += v;
    out += '\n';
  };
  auto kvd = [&](const char* k, double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    kv(k, buf);
  };
  kv("agent", agent_name(agent));
  kv("episodes", std::to_string(episodes));
  std::string s;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(seeds[i]);
  }
  kv("seeds", s);
  kv("cf", cf ? "1" : "0");
  kv("ua", ua ? "1" : "0");
  kv("tr", tr ? "1" : "0");
  kv("xf", xf ? "1" : "0");
  kv("pr", pr ? "1" : "0");
  kvd("dropout_p", dropout_p);
  kvd("holdout_fraction", holdout_fraction);
  kv("phq_cutpoint", std::to_string(phq_cutpoint));
  kv("pclc_cutpoint", std::to_string(pclc_cutpoint));
  kv("dirichlet_w", dirichlet_w ? "1" : "0");
  kvd("dirichlet_concentration", dirichlet_concentration);
  kv("cohort_n", std::to_string(cohort_n));
  kv("cohort_seed", std::to_string(cohort_seed));
  kv("log_every", std::to_string(log_every));
  kvd("td3.gamma", td3.gamma);
  kvd("td3.tau", td3.tau);
  kvd("td3.lr", td3.lr);
  kv("td3.buffer_capacity", std::to_string(td3.buffer_capacity));
  kv("td3.batch", std::to_string(td3.batch));
  kvd("td3.explore_sigma", td3.explore_sigma);
  kvd("td3.target_sigma", td3.target_sigma);
  kvd("td3.target_clip", td3.target_clip);
  kv("td3.policy_delay", std::to_string(td3.policy_delay));
  kvd("td3.lambda_cf", td3.lambda_cf);
  kv("td3.update_every", std::to_string(td3.update_every));
  kv("td3.warmup_steps", std::to_string(td3.warmup_steps));
  kvd("ppo.gae_lambda", ppo.gae_lambda);
  kvd("ppo.clip", ppo.clip);
  kvd("ppo.entropy_coef", ppo.entropy_coef);
  kvd("ppo.value_coef", ppo.value_coef);
  kvd("ppo.lr", ppo.lr);
  kv("ppo.rollout", std::to_string(ppo.rollout));
  kv("ppo.epochs", std::to_string(ppo.epochs));
  kv("ppo.minibatch", std::to_string(ppo.minibatch));
  kv("cem.population", std::to_string(cem.population));
  kvd("cem.elite_frac", cem.elite_frac);
  kvd("cem.var_floor_frac", cem.var_floor_frac);
  kvd("cem.init_std_frac", cem.init_std_frac);
  kv("cem.eval_episodes", std::to_string(cem.eval_episodes));
  return out;
}

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string RunConfig::hash() const {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(canonical_text())));
  return buf;
}

namespace {

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "1" || v == "true" || v == "on") return true;
  if (v == "0" || v == "false" || v == "off") return false;
  throw config_error("config: bad boolean for " + key + ": " + v);
}

double parse_double(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw config_error("config: bad number for " + key + ": " + v);
  }
}

long long parse_int(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long long d = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw config_error("config: bad integer for " + key + ": " + v);
  }
}

}  // namespace

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "agent") cfg.agent = agent_from_name(value);
  else if (key == "episodes") cfg.episodes = static_cast<int>(parse_int(value, key));
  else if (key == "seeds") {
    cfg.seeds.clear();
    std::istringstream ss(value);
    std::string tok;
    while (std::getline(ss, tok, ','))
      cfg.seeds.push_back(static_cast<std::uint64_t>(parse_int(tok, key)));
    if (cfg.seeds.empty()) throw config_error("config: empty seeds list");
  } else if (key == "cf") cfg.cf = parse_bool(value, key);
  else if (key == "ua") cfg.ua = parse_bool(value, key);
  else if (key == "tr") cfg.tr = parse_bool(value, key);
  else if (key == "xf") cfg.xf = parse_bool(value, key);
  else if (key == "pr") cfg.pr = parse_bool(value, key);
  else if (key == "dropout_p") cfg.dropout_p = parse_double(value, key);
  else if (key == "holdout_fraction") cfg.holdout_fraction = parse_double(value, key);
  else if (key == "phq_cutpoint") cfg.phq_cutpoint = static_cast<int>(parse_int(value, key));
  else if (key == "pclc_cutpoint") cfg.pclc_cutpoint = static_cast<int>(parse_int(value, key));
  else if (key == "dirichlet_w") cfg.dirichlet_w = parse_bool(value, key);
  else if (key == "dirichlet_concentration") cfg.dirichlet_concentration = parse_double(value, key);
  else if (key == "cohort_n") cfg.cohort_n = static_cast<int>(parse_int(value, key));
  else if (key == "cohort_seed") cfg.cohort_seed = static_cast<std::uint64_t>(parse_int(value, key));
  else if (key == "out_dir") cfg.out_dir = value;
  else if (key == "log_every") cfg.log_every = static_cast<int>(parse_int(value, key));
  else if (key == "jobs") cfg.jobs = static_cast<int>(parse_int(value, key));
  else if (key == "td3.gamma") cfg.td3.gamma = parse_double(value, key);
  else if (key == "td3.tau") cfg.td3.tau = parse_double(value, key);
  else if (key == "td3.lr") cfg.td3.lr = parse_double(value, key);
  else if (key == "td3.buffer_capacity") cfg.td3.buffer_capacity = static_cast<std::size_t>(parse_int(value, key));
  else if (key == "td3.batch") cfg.td3.batch = static_cast<int>(parse_int(value, key));
  else if (key == "td3.explore_sigma") cfg.td3.explore_sigma = parse_double(value, key);
  else if (key == "td3.target_sigma") cfg.td3.target_sigma = parse_double(value, key);
  else if (key == "td3.target_clip") cfg.td3.target_clip = parse_double(value, key);
  else if (key == "td3.policy_delay") cfg.td3.policy_delay = static_cast<int>(parse_int(value, key));
  else if (key == "td3.lambda_cf") cfg.td3.lambda_cf = parse_double(value, key);
  else if (key == "td3.update_every") cfg.td3.update_every = static_cast<int>(parse_int(value, key));
  else if (key == "td3.warmup_steps") cfg.td3.warmup_steps = static_cast<int>(parse_int(value, key));
  else if (key == "ppo.gae_lambda") cfg.ppo.gae_lambda = parse_double(value, key);
  else if (key == "ppo.clip") cfg.ppo.clip = parse_double(value, key);
  else if (key == "ppo.entropy_coef") cfg.ppo.entropy_coef = parse_double(value, key);
  else if (key == "ppo.value_coef") cfg.ppo.value_coef = parse_double(value, key);
  else if (key == "ppo.lr") cfg.ppo.lr = parse_double(value, key);
  else if (key == "ppo.rollout") cfg.ppo.rollout = static_cast<int>(parse_int(value, key));
  else if (key == "ppo.epochs") cfg.ppo.epochs = static_cast<int>(parse_int(value, key));
  else if (key == "ppo.minibatch") cfg.ppo.minibatch = static_cast<int>(parse_int(value, key));
  else if (key == "cem.population") cfg.cem.population = static_cast<int>(parse_int(value, key));
  else if (key == "cem.elite_frac") cfg.cem.elite_frac = parse_double(value, key);
  else if (key == "cem.var_floor_frac") cfg.cem.var_floor_frac = parse_double(value, key);
  else if (key == "cem.init_std_frac") cfg.cem.init_std_frac = parse_double(value, key);
  else if (key == "cem.eval_episodes") cfg.cem.eval_episodes = static_cast<int>(parse_int(value, key));
  else throw config_error("config: unknown key: " + key);
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.resize(hash_pos);
    std::istringstream ls(line);
    std::string key, value;
    if (!(ls >> key)) continue;
    if (!(ls >> value))
      throw config_error("config: missing value at line " + std::to_string(lineno));
    std::string extra;
    if (ls >> extra)
      throw config_error("config: trailing tokens at line " + std::to_string(lineno));
    apply_override(cfg, key, value);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("config: cannot open: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace isim::harness
