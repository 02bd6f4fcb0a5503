#pragma once

#include <array>

#include "isim/cohort/features.hpp"
#include "isim/num/tensor.hpp"

namespace isim::env {

inline constexpr int kFusionDim = 10;

// Seed of the fixed random projections; every run uses the same matrices so
// states are comparable across configs and checkpoints.
inline constexpr std::uint64_t kFusionSeed = 0x15F0u;

// Per-modality blocks after projection, kept so training can re-pool them
// under reliability dropout.
struct FusedBlocks {
  std::array<std::array<double, kFusionDim>, 3> z{};  // speech, face, pose
  std::array<double, 3> kappa{};
};

// Deterministic fusion front end: three fixed Gaussian projections
// (8/8/4 -> 10) pooled with reliability gates g_m = kappa_m / sum(kappa)
// and squashed with tanh. With reliability gating disabled the pool uses
// uniform 1/3 weights.
class Fusion {
 public:
  Fusion();

  FusedBlocks project(const cohort::ModalityFrame& frame) const;

  std::array<double, kFusionDim> pool(const FusedBlocks& blocks,
                                      bool reliability_gated) const;

  std::array<double, kFusionDim> fuse(const cohort::ModalityFrame& frame,
                                      bool reliability_gated) const;

 private:
  num::Matrix p_speech_;  // 10 x 8
  num::Matrix p_face_;    // 10 x 8
  num::Matrix p_pose_;    // 10 x 4
};

}  // namespace isim::env
