#include "isim/agents/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "isim/errors.hpp"

namespace isim::agents {

namespace {

constexpr const char* kHeader = "# isim checkpoint v1";

std::vector<double> span_copy(std::span<const double> s) {
  return {s.begin(), s.end()};
}

void assign_params(num::Mlp& net, const std::vector<double>& vals,
                   const char* what) {
  auto p = net.params();
  if (p.size() != vals.size())
    throw io_error(std::string("checkpoint: tensor size mismatch for ") + what);
  std::copy(vals.begin(), vals.end(), p.begin());
}

}  // namespace

const std::vector<double>* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, v] : tensors)
    if (n == name) return &v;
  return nullptr;
}

std::string Checkpoint::meta_value(const std::string& key) const {
  for (const auto& [k, v] : meta)
    if (k == key) return v;
  return {};
}

std::string checkpoint_to_text(const Checkpoint& c) {
  std::string out = kHeader;
  out += "\nkind ";
  out += c.kind;
  out += "\nconfig_hash ";
  out += c.config_hash;
  out += '\n';
  for (const auto& [k, v] : c.meta) {
    out += "meta ";
    out += k;
    out += ' ';
    out += v;
    out += '\n';
  }
  char buf[40];
  for (const auto& [name, vals] : c.tensors) {
    out += "tensor ";
    out += name;
    out += ' ';
    out += std::to_string(vals.size());
    out += '\n';
    for (std::size_t i = 0; i < vals.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%a", vals[i]);
      out += buf;
      out += (i + 1) % 8 == 0 || i + 1 == vals.size() ? '\n' : ' ';
    }
  }
  return out;
}

Checkpoint checkpoint_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kHeader)
    throw io_error("checkpoint: missing or unsupported header");
  Checkpoint c;
  std::string word;
  while (in >> word) {
    if (word == "kind") {
      in >> c.kind;
    } else if (word == "config_hash") {
      in >> c.config_hash;
    } else if (word == "meta") {
      std::string k, v;
      in >> k >> v;
      c.meta.emplace_back(k, v);
    } else if (word == "tensor") {
      std::string name;
      std::size_t n = 0;
      in >> name >> n;
      std::vector<double> vals(n);
      for (auto& v : vals) {
        std::string tok;
        if (!(in >> tok)) throw io_error("checkpoint: truncated tensor " + name);
        char* end = nullptr;
        v = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str()) throw io_error("checkpoint: bad value in " + name);
      }
      c.tensors.emplace_back(name, std::move(vals));
    } else {
      throw io_error("checkpoint: unknown directive " + word);
    }
  }
  return c;
}

void save_checkpoint(const Checkpoint& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("checkpoint: cannot open for writing: " + path);
  out << checkpoint_to_text(c);
  if (!out) throw io_error("checkpoint: write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("checkpoint: cannot open: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_text(ss.str());
}

Checkpoint td3_checkpoint(Td3Agent& agent, const std::string& config_hash) {
  Checkpoint c;
  c.kind = "td3";
  c.config_hash = config_hash;
  c.meta.emplace_back("env_steps", std::to_string(agent.env_steps()));
  c.meta.emplace_back("update_calls", std::to_string(agent.update_calls()));
  c.meta.emplace_back("actor_updates", std::to_string(agent.actor_updates()));
  c.meta.emplace_back("adam_t_actor", std::to_string(agent.actor_opt().steps()));
  c.meta.emplace_back("adam_t_q1", std::to_string(agent.critic1_opt().steps()));
  c.meta.emplace_back("adam_t_q2", std::to_string(agent.critic2_opt().steps()));
  c.tensors.emplace_back("actor", span_copy(agent.actor().params()));
  c.tensors.emplace_back("critic1", span_copy(agent.critic1().params()));
  c.tensors.emplace_back("critic2", span_copy(agent.critic2().params()));
  c.tensors.emplace_back("target_actor", span_copy(agent.target_actor().params()));
  c.tensors.emplace_back("target_critic1", span_copy(agent.target_critic1().params()));
  c.tensors.emplace_back("target_critic2", span_copy(agent.target_critic2().params()));
  c.tensors.emplace_back("adam_m_actor", agent.actor_opt().first_moment());
  c.tensors.emplace_back("adam_v_actor", agent.actor_opt().second_moment());
  c.tensors.emplace_back("adam_m_q1", agent.critic1_opt().first_moment());
  c.tensors.emplace_back("adam_v_q1", agent.critic1_opt().second_moment());
  c.tensors.emplace_back("adam_m_q2", agent.critic2_opt().first_moment());
  c.tensors.emplace_back("adam_v_q2", agent.critic2_opt().second_moment());
  return c;
}

void td3_restore(Td3Agent& agent, const Checkpoint& c) {
  if (c.kind != "td3") throw io_error("checkpoint: expected kind td3");
  auto need = [&](const char* name) -> const std::vector<double>& {
    const auto* t = c.find(name);
    if (!t) throw io_error(std::string("checkpoint: missing tensor ") + name);
    return *t;
  };
  assign_params(agent.actor(), need("actor"), "actor");
  assign_params(agent.critic1(), need("critic1"), "critic1");
  assign_params(agent.critic2(), need("critic2"), "critic2");
  assign_params(agent.target_actor(), need("target_actor"), "target_actor");
  assign_params(agent.target_critic1(), need("target_critic1"), "target_critic1");
  assign_params(agent.target_critic2(), need("target_critic2"), "target_critic2");
  agent.actor_opt().restore(std::stoull(c.meta_value("adam_t_actor")),
                            need("adam_m_actor"), need("adam_v_actor"));
  agent.critic1_opt().restore(std::stoull(c.meta_value("adam_t_q1")),
                              need("adam_m_q1"), need("adam_v_q1"));
  agent.critic2_opt().restore(std::stoull(c.meta_value("adam_t_q2")),
                              need("adam_m_q2"), need("adam_v_q2"));
  agent.restore_counters(std::stoull(c.meta_value("env_steps")),
                         std::stoull(c.meta_value("update_calls")),
                         std::stoull(c.meta_value("actor_updates")));
}

Checkpoint ppo_checkpoint(PpoAgent& agent, const std::string& config_hash) {
  Checkpoint c;
  c.kind = "ppo";
  c.config_hash = config_hash;
  c.meta.emplace_back("adam_t_policy", std::to_string(agent.policy_opt().steps()));
  c.meta.emplace_back("adam_t_value", std::to_string(agent.value_opt().steps()));
  c.meta.emplace_back("adam_t_log_std", std::to_string(agent.log_std_opt().steps()));
  c.tensors.emplace_back("policy", span_copy(agent.policy().params()));
  c.tensors.emplace_back("value", span_copy(agent.value().params()));
  c.tensors.emplace_back("log_std", agent.log_std());
  c.tensors.emplace_back("adam_m_policy", agent.policy_opt().first_moment());
  c.tensors.emplace_back("adam_v_policy", agent.policy_opt().second_moment());
  c.tensors.emplace_back("adam_m_value", agent.value_opt().first_moment());
  c.tensors.emplace_back("adam_v_value", agent.value_opt().second_moment());
  c.tensors.emplace_back("adam_m_log_std", agent.log_std_opt().first_moment());
  c.tensors.emplace_back("adam_v_log_std", agent.log_std_opt().second_moment());
  return c;
}

void ppo_restore(PpoAgent& agent, const Checkpoint& c) {
  if (c.kind != "ppo") throw io_error("checkpoint: expected kind ppo");
  auto need = [&](const char* name) -> const std::vector<double>& {
    const auto* t = c.find(name);
    if (!t) throw io_error(std::string("checkpoint: missing tensor ") + name);
    return *t;
  };
  assign_params(agent.policy(), need("policy"), "policy");
  assign_params(agent.value(), need("value"), "value");
  if (need("log_std").size() != agent.log_std().size())
    throw io_error("checkpoint: log_std size mismatch");
  agent.log_std() = need("log_std");
  agent.policy_opt().restore(std::stoull(c.meta_value("adam_t_policy")),
                             need("adam_m_policy"), need("adam_v_policy"));
  agent.value_opt().restore(std::stoull(c.meta_value("adam_t_value")),
                            need("adam_m_value"), need("adam_v_value"));
  agent.log_std_opt().restore(std::stoull(c.meta_value("adam_t_log_std")),
                              need("adam_m_log_std"), need("adam_v_log_std"));
}

Checkpoint cem_checkpoint(const CemState& state, int iteration,
                          const std::string& config_hash) {
  Checkpoint c;
  c.kind = "cem";
  c.config_hash = config_hash;
  c.meta.emplace_back("iteration", std::to_string(iteration));
  c.tensors.emplace_back("mean",
                         std::vector<double>(state.mean.begin(), state.mean.end()));
  c.tensors.emplace_back("var",
                         std::vector<double>(state.var.begin(), state.var.end()));
  return c;
}

CemState cem_restore(const Checkpoint& c, int* iteration) {
  if (c.kind != "cem") throw io_error("checkpoint: expected kind cem");
  const auto* mean = c.find("mean");
  const auto* var = c.find("var");
  if (!mean || !var || mean->size() != env::kActionDim || var->size() != env::kActionDim)
    throw io_error("checkpoint: bad cem tensors");
  CemState s;
  std::copy(mean->begin(), mean->end(), s.mean.begin());
  std::copy(var->begin(), var->end(), s.var.begin());
  if (iteration) *iteration = std::stoi(c.meta_value("iteration"));
  return s;
}

}  // namespace isim::agents
