#include "isim/env/fusion.hpp"

#include <cmath>

#include "isim/num/rng.hpp"

namespace isim::env {

namespace {

num::Matrix projection(int rows, int cols, std::uint64_t stream) {
  num::Rng rng(kFusionSeed, stream);
  num::Matrix m(rows, cols);
  const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
  for (auto& v : m.data) v = rng.normal(0.0, scale);
  return m;
}

template <std::size_t N>
void project_block(const num::Matrix& p, const std::array<double, N>& f,
                   std::array<double, kFusionDim>& out) {
  for (int r = 0; r < kFusionDim; ++r) {
    double acc = 0;
    for (int c = 0; c < static_cast<int>(N); ++c) acc += p.at(r, c) * f[c];
    out[r] = acc;
  }
}

}  // namespace

Fusion::Fusion()
    : p_speech_(projection(kFusionDim, cohort::kSpeechDim, 1)),
      p_face_(projection(kFusionDim, cohort::kFaceDim, 2)),
      p_pose_(projection(kFusionDim, cohort::kPoseDim, 3)) {}

FusedBlocks Fusion::project(const cohort::ModalityFrame& frame) const {
  FusedBlocks b;
  project_block(p_speech_, frame.speech, b.z[0]);
  project_block(p_face_, frame.face, b.z[1]);
  project_block(p_pose_, frame.pose, b.z[2]);
  b.kappa = frame.kappa;
  return b;
}

std::array<double, kFusionDim> Fusion::pool(const FusedBlocks& blocks,
                                            bool reliability_gated) const {
  std::array<double, 3> gates{};
  if (reliability_gated) {
    const double sum = blocks.kappa[0] + blocks.kappa[1] + blocks.kappa[2];
    if (sum > 1e-12)
      for (int m = 0; m < 3; ++m) gates[m] = blocks.kappa[m] / sum;
  } else {
    gates = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  }
  std::array<double, kFusionDim> x{};
  for (int r = 0; r < kFusionDim; ++r) {
    double acc = 0;
    for (int m = 0; m < 3; ++m) acc += gates[m] * blocks.z[m][r];
    x[r] = std::tanh(acc);
  }
  return x;
}

std::array<double, kFusionDim> Fusion::fuse(const cohort::ModalityFrame& frame,
                                            bool reliability_gated) const {
  return pool(project(frame), reliability_gated);
}

}  // namespace isim::env
