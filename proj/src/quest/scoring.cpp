#include "isim/quest/scoring.hpp"

#include <algorithm>

#include "isim/errors.hpp"

namespace isim::quest {

Phq8Score score_phq8(const PHQ8Response& resp, int cutpoint) {
  int total = 0;
  for (int s : resp.scores) {
    if (s < 0 || s > 3) throw shape_error("score_phq8: item score out of 0..3");
    total += s;
  }
  Phq8Band band = Phq8Band::Minimal;
  if (total >= 20)
    band = Phq8Band::Severe;
  else if (total >= 15)
    band = Phq8Band::ModeratelySevere;
  else if (total >= 10)
    band = Phq8Band::Moderate;
  else if (total >= 5)
    band = Phq8Band::Mild;
  return {total, band, total >= cutpoint};
}

PclcScore score_pclc(const PCLCResponse& resp, int cutpoint) {
  if (cutpoint < kPclcCutpointMin || cutpoint > kPclcCutpointMax)
    throw shape_error("score_pclc: cutpoint out of 44..50");
  int total = 0;
  int b = 0, c = 0, d = 0;
  for (int i = 0; i < kPclcItems; ++i) {
    const int s = resp.scores[i];
    if (s < 1 || s > 5) throw shape_error("score_pclc: item score out of 1..5");
    total += s;
    if (s >= 3) {
      switch (pclc_cluster(i + 1)) {
        case Cluster::B: ++b; break;
        case Cluster::C: ++c; break;
        case Cluster::D: ++d; break;
        default: break;
      }
    }
  }
  const bool cluster_positive = b >= 1 && c >= 3 && d >= 2;
  return {total, cluster_positive, total >= cutpoint, cutpoint};
}

ScreenResult screen(const PHQ8Response& phq, const PCLCResponse& pclc,
                    int phq_cutpoint, int pclc_cutpoint) {
  const Phq8Score p = score_phq8(phq, phq_cutpoint);
  const PclcScore q = score_pclc(pclc, pclc_cutpoint);
  return {p.total, p.band, p.positive, q.total, q.cluster_positive,
          q.cutpoint_positive, q.cutpoint_used};
}

const char* band_name(Phq8Band band) {
  switch (band) {
    case Phq8Band::Minimal: return "minimal";
    case Phq8Band::Mild: return "mild";
    case Phq8Band::Moderate: return "moderate";
    case Phq8Band::ModeratelySevere: return "moderately-severe";
    case Phq8Band::Severe: return "severe";
  }
  return "?";
}

std::vector<double> posterior_uncertainty(const std::vector<double>& confidences,
                                          const std::vector<bool>& answered) {
  if (confidences.size() != kScheduleLength || answered.size() != kScheduleLength)
    throw shape_error("posterior_uncertainty: arrays must cover all 25 items");
  std::vector<double> u(kScheduleLength);
  for (int i = 0; i < kScheduleLength; ++i) {
    u[i] = answered[i] ? std::clamp(1.0 - confidences[i], 0.0, 1.0) : 1.0;
  }
  return u;
}

}  // namespace isim::quest
