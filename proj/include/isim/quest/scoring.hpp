#pragma once

#include <array>
#include <vector>

#include "isim/quest/items.hpp"

namespace isim::quest {

struct PHQ8Response {
  std::array<int, kPhq8Items> scores{};  // each in 0..3
};

struct PCLCResponse {
  std::array<int, kPclcItems> scores{};  // each in 1..5
};

enum class Phq8Band { Minimal, Mild, Moderate, ModeratelySevere, Severe };

struct Phq8Score {
  int total;  // 0..24
  Phq8Band band;
  bool positive;  // total >= 10
};

struct PclcScore {
  int total;  // 17..85
  bool cluster_positive;
  bool cutpoint_positive;
  int cutpoint_used;
};

struct ScreenResult {
  int phq8_total;
  Phq8Band phq8_band;
  bool phq8_positive;
  int pclc_total;
  bool pclc_cluster_positive;
  bool pclc_cutpoint_positive;
  int cutpoint_used;
};

inline constexpr int kPclcCutpointMin = 44;
inline constexpr int kPclcCutpointMax = 50;
inline constexpr int kPclcDefaultCutpoint = 44;
inline constexpr int kPhq8DefaultCutpoint = 10;

// Sum with severity bands at 5/10/15/20; positive iff total >= cutpoint
// (default 10). Throws on out-of-range item scores.
Phq8Score score_phq8(const PHQ8Response& resp, int cutpoint = kPhq8DefaultCutpoint);

// Sum plus the two PCL-C standards: the B(1)+C(3)+D(2) symptom-cluster rule
// (item symptomatic iff score >= 3) and a total cutpoint in 44..50.
PclcScore score_pclc(const PCLCResponse& resp, int cutpoint = kPclcDefaultCutpoint);

ScreenResult screen(const PHQ8Response& phq, const PCLCResponse& pclc,
                    int phq_cutpoint = kPhq8DefaultCutpoint,
                    int pclc_cutpoint = kPclcDefaultCutpoint);

const char* band_name(Phq8Band band);

// Per-item uncertainty over the 25-item schedule: unanswered items get 1,
// answered items get 1 - confidence, clamped to [0,1].
std::vector<double> posterior_uncertainty(const std::vector<double>& confidences,
                                          const std::vector<bool>& answered);

}  // namespace isim::quest
