#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "isim/quest/scoring.hpp"

namespace isim::cohort {

// One synthetic patient: latent item severities plus the behavioral
// parameters that drive the feature generators. Times are in the abstract
// environment time unit (0.1 s).
struct PatientProfile {
  std::int64_t id = 0;
  std::array<int, quest::kPhq8Items> phq8_latent{};   // 0..3
  std::array<int, quest::kPclcItems> pclc_latent{};   // 1..5
  double base_latency = 6.0;     // patient's own pre-answer delay, time units
  double utterance_scale = 22.0; // baseline answer duration, time units
  double au4_intensity = 0.3;    // brow lowerer, [0,1]
  double au12_intensity = 0.6;   // lip-corner pull, [0,1]
  double gaze_aversion = 0.3;    // [0,1]
  double prosody_jitter = 0.2;   // [0,1]
  double pause_rate = 0.25;      // [0,1]

  // Overall severity in [0,1], the average of the normalized totals.
  double severity() const;

  quest::PHQ8Response phq8_response() const;
  quest::PCLCResponse pclc_response() const;
};

// Ground-truth screen computed from the latent item scores.
quest::ScreenResult true_screen(const PatientProfile& p,
                                int phq_cutpoint = quest::kPhq8DefaultCutpoint,
                                int pclc_cutpoint = quest::kPclcDefaultCutpoint);

using Cohort = std::vector<PatientProfile>;

}  // namespace isim::cohort
