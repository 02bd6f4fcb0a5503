#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "isim/env/fusion.hpp"
#include "isim/env/metrics.hpp"
#include "isim/num/rng.hpp"

namespace isim::agents {

struct Transition {
  std::array<double, env::kStateDim> s{};
  std::array<double, env::kActionDim> a{};
  double r = 0;
  std::array<double, env::kStateDim> s_next{};
  bool done = false;
  bool has_cf = false;
  std::array<double, env::kStateDim> s_cf{};  // counterfactual variant of s
  // Modality provenance of s for reliability dropout during training.
  env::FusedBlocks blocks;
};

// Fixed-capacity ring: oldest transitions are overwritten first; logical
// index 0 always addresses the oldest surviving record.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(const Transition& t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }

  const Transition& at(std::size_t logical) const;

  // Uniform indices with replacement.
  std::vector<std::size_t> sample_indices(std::size_t batch, num::Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // next write slot
  std::size_t size_ = 0;
  std::vector<Transition> store_;
};

}  // namespace isim::agents
