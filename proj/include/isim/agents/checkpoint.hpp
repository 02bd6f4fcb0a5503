#pragma once

#include <string>
#include <utility>
#include <vector>

#include "isim/agents/cem.hpp"
#include "isim/agents/ppo.hpp"
#include "isim/agents/td3.hpp"

namespace isim::agents {

// Versioned structured-text parameter dump. Values are written as C
// hexfloats, so a checkpoint round-trips bit-exactly.
struct Checkpoint {
  std::string kind;         // td3 | ppo | cem
  std::string config_hash;  // hash of the resolved run config
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::pair<std::string, std::vector<double>>> tensors;

  const std::vector<double>* find(const std::string& name) const;
  std::string meta_value(const std::string& key) const;
};

std::string checkpoint_to_text(const Checkpoint& c);
Checkpoint checkpoint_from_text(const std::string& text);
void save_checkpoint(const Checkpoint& c, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

Checkpoint td3_checkpoint(Td3Agent& agent, const std::string& config_hash);
void td3_restore(Td3Agent& agent, const Checkpoint& c);

Checkpoint ppo_checkpoint(PpoAgent& agent, const std::string& config_hash);
void ppo_restore(PpoAgent& agent, const Checkpoint& c);

Checkpoint cem_checkpoint(const CemState& state, int iteration,
                          const std::string& config_hash);
CemState cem_restore(const Checkpoint& c, int* iteration = nullptr);

}  // namespace isim::agents
