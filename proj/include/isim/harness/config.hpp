#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "isim/agents/cem.hpp"
#include "isim/agents/ppo.hpp"
#include "isim/agents/td3.hpp"
#include "isim/env/interview_env.hpp"

namespace isim::harness {

enum class AgentKind { TD3, PPO, CEM };

const char* agent_name(AgentKind k);
AgentKind agent_from_name(const std::string& name);

// Resolved experiment configuration. Every run embeds the hash of its
// canonical serialization.
struct RunConfig {
  AgentKind agent = AgentKind::TD3;
  int episodes = 3000;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};

  // Component toggles; true = enabled (the ablation suite disables one at
  // a time).
  bool cf = true;
  bool ua = true;
  bool tr = true;
  bool xf = true;
  bool pr = true;

  double dropout_p = 0.0;
  double holdout_fraction = 0.2;
  int phq_cutpoint = 10;
  int pclc_cutpoint = 44;

  // Preference weights: uniform by default, optionally re-sampled per
  // episode from a symmetric Dirichlet.
  bool dirichlet_w = false;
  double dirichlet_concentration = 5.0;

  int cohort_n = 276;
  std::uint64_t cohort_seed = 1;
  std::string out_dir;
  int log_every = 50;  // persist full episode logs every k-th episode
  int jobs = 1;

  agents::Td3Config td3;
  agents::PpoConfig ppo;
  agents::CemConfig cem;

  void validate() const;

  // Environment configuration with the toggles applied. The TR ablation
  // zeroes the interaction-quality reward components and renormalizes.
  env::EnvConfig env_config() const;

  // Canonical text form (sorted keys); its FNV-1a hash labels the run.
  std::string canonical_text() const;
  std::string hash() const;
};

// key/value config file; '#' starts a comment; unknown keys are rejected.
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

// In-place override of a single key (CLI flags after the file).
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

std::uint64_t fnv1a(const std::string& data);

}  // namespace isim::harness
