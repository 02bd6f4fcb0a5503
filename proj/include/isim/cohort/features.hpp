#pragma once

#include <array>

#include "isim/cohort/profile.hpp"
#include "isim/num/rng.hpp"
#include "isim/quest/items.hpp"

namespace isim::cohort {

inline constexpr int kSpeechDim = 8;
inline constexpr int kFaceDim = 8;
inline constexpr int kPoseDim = 4;

// Interpretable leading slots inside the feature blocks. The counterfactual
// perturbations operate on exactly these channels.
inline constexpr int kSpeechJitter = 0;
inline constexpr int kSpeechPause = 1;
inline constexpr int kFaceAu4 = 0;
inline constexpr int kFaceAu12 = 1;
inline constexpr int kFaceGaze = 2;

// Noise floor of the speech block when prosody_jitter is zero.
inline constexpr double kSpeechNoiseFloor = 0.02;

struct ModalityFrame {
  std::array<double, kSpeechDim> speech{};
  std::array<double, kFaceDim> face{};
  std::array<double, kPoseDim> pose{};
  std::array<double, 3> kappa{1.0, 1.0, 1.0};  // speech/face/pose reliability
};

struct TurnFeatures {
  ModalityFrame frame;
  double utterance_duration = 0.0;  // time units
};

// Per-channel counterfactual perturbation bounds (max absolute shift).
struct CounterfactualBounds {
  double au4 = 0.15;
  double au12 = 0.15;
  double gaze = 0.15;
  double jitter = 0.10;
  double pause = 0.10;
};

// Item severity in [0,1] from the profile's latent score for that item.
double item_severity(const PatientProfile& p, const quest::ItemId& item);

// Draws one turn of multimodal features conditioned on the profile and the
// item being asked. Reliability follows kappa = 1 - dip with dip ~
// Beta(1, b), b = ln(0.05)/ln(0.5), putting a dip above 0.5 at exactly 5%
// probability per modality per turn.
TurnFeatures emit_turn_features(const PatientProfile& p, const quest::ItemId& item,
                                num::Rng& rng);

// Neutral pre-turn frame (severity-0 behavior) used for the reset state.
TurnFeatures emit_neutral_features(const PatientProfile& p, num::Rng& rng);

// Shifts the cue channels by uniform noise within the bounds. Shifts that
// would leave the [0,1] physical range are rejected and redrawn; more than
// 100 attempts on one channel reports the bounds as too large.
ModalityFrame perturb_counterfactual(const ModalityFrame& frame,
                                     const CounterfactualBounds& bounds,
                                     num::Rng& rng);

// Independently zeroes each modality block with probability p and marks its
// reliability as 0.
ModalityFrame mask_modalities(const ModalityFrame& frame, double p, num::Rng& rng);

}  // namespace isim::cohort
