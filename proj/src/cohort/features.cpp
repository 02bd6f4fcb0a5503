#include "isim/cohort/features.hpp"

#include <algorithm>
#include <cmath>

#include "isim/errors.hpp"

namespace isim::cohort {

using num::Rng;

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// P(dip > 0.5) = 0.5^b = 0.05.
constexpr double kDipShape = 4.3219280948873623;

double sample_kappa(Rng& rng) {
  const double dip = 1.0 - std::pow(rng.uniform(), 1.0 / kDipShape);
  return clamp01(1.0 - dip);
}

TurnFeatures emit_features(const PatientProfile& p, double sev_item, Rng& rng) {
  TurnFeatures out;
  auto& f = out.frame;
  const double sev = p.severity();
  const double speech_noise = kSpeechNoiseFloor + 0.10 * p.prosody_jitter;

  f.speech[kSpeechJitter] = clamp01(p.prosody_jitter + rng.normal(0, speech_noise));
  f.speech[kSpeechPause] = clamp01(p.pause_rate + rng.normal(0, speech_noise));
  f.speech[2] = clamp01(p.base_latency / 14.0 + rng.normal(0, speech_noise));
  f.speech[3] = clamp01(0.5 + 0.3 * sev_item - 0.2 * p.au12_intensity +
                        rng.normal(0, speech_noise));
  f.speech[4] = clamp01(0.3 + 0.3 * sev + rng.normal(0, speech_noise));
  f.speech[5] = clamp01(0.5 - 0.2 * sev + rng.normal(0, speech_noise));
  f.speech[6] = clamp01(0.4 + 0.2 * sev_item + rng.normal(0, speech_noise));
  f.speech[7] = clamp01(0.5 + rng.normal(0, speech_noise));

  f.face[kFaceAu4] = clamp01(p.au4_intensity * (0.8 + 0.4 * sev_item) +
                             rng.normal(0, 0.05));
  f.face[kFaceAu12] = clamp01(p.au12_intensity * (1.1 - 0.4 * sev_item) +
                              rng.normal(0, 0.05));
  f.face[kFaceGaze] = clamp01(p.gaze_aversion + rng.normal(0, 0.06));
  f.face[3] = clamp01(0.3 + 0.2 * sev + rng.normal(0, 0.05));      // blink rate
  f.face[4] = clamp01(0.2 + 0.4 * p.au4_intensity + rng.normal(0, 0.05));
  f.face[5] = clamp01(0.6 * p.au12_intensity + 0.1 + rng.normal(0, 0.05));
  f.face[6] = clamp01(0.4 + 0.2 * sev_item + rng.normal(0, 0.05));
  f.face[7] = clamp01(0.5 - 0.1 * sev + rng.normal(0, 0.05));

  f.pose[0] = clamp01(0.2 + 0.5 * sev + rng.normal(0, 0.05));       // slump
  f.pose[1] = clamp01(0.3 + 0.2 * p.gaze_aversion + rng.normal(0, 0.05));
  f.pose[2] = clamp01(0.4 + 0.1 * sev_item + rng.normal(0, 0.05));
  f.pose[3] = clamp01(0.5 + rng.normal(0, 0.05));

  for (auto& k : f.kappa) k = sample_kappa(rng);

  out.utterance_duration = std::clamp(
      p.utterance_scale * (1.0 + sev_item) * std::exp(rng.normal(0, 0.25)), 4.0, 200.0);
  return out;
}

}  // namespace

double item_severity(const PatientProfile& p, const quest::ItemId& item) {
  if (item.instrument == quest::Instrument::PHQ8) {
    if (item.index < 1 || item.index > quest::kPhq8Items)
      throw shape_error("item_severity: PHQ8 index");
    return p.phq8_latent[item.index - 1] / 3.0;
  }
  if (item.index < 1 || item.index > quest::kPclcItems)
    throw shape_error("item_severity: PCLC index");
  return (p.pclc_latent[item.index - 1] - 1) / 4.0;
}

TurnFeatures emit_turn_features(const PatientProfile& p, const quest::ItemId& item,
                                Rng& rng) {
  return emit_features(p, item_severity(p, item), rng);
}

TurnFeatures emit_neutral_features(const PatientProfile& p, Rng& rng) {
  return emit_features(p, 0.0, rng);
}

ModalityFrame perturb_counterfactual(const ModalityFrame& frame,
                                     const CounterfactualBounds& bounds,
                                     Rng& rng) {
  if (bounds.au4 < 0 || bounds.au12 < 0 || bounds.gaze < 0 || bounds.jitter < 0 ||
      bounds.pause < 0)
    throw config_error("perturb_counterfactual: negative bound");

  ModalityFrame out = frame;
  struct Channel {
    double* value;
    double bound;
  };
  Channel channels[5] = {
      {&out.face[kFaceAu4], bounds.au4},   {&out.face[kFaceAu12], bounds.au12},
      {&out.face[kFaceGaze], bounds.gaze}, {&out.speech[kSpeechJitter], bounds.jitter},
      {&out.speech[kSpeechPause], bounds.pause}};

  for (auto& ch : channels) {
    if (ch.bound == 0.0) continue;
    const double original = *ch.value;
    bool accepted = false;
    for (int attempt = 0; attempt < 100; ++attempt) {
      const double candidate = original + rng.uniform(-ch.bound, ch.bound);
      if (candidate >= 0.0 && candidate <= 1.0) {
        *ch.value = candidate;
        accepted = true;
        break;
      }
    }
    if (!accepted)
      throw config_error("perturb_counterfactual: bounds too large for channel");
    // Physical range is an invariant of the frame.
    *ch.value = clamp01(*ch.value);
  }
  return out;
}

ModalityFrame mask_modalities(const ModalityFrame& frame, double p, Rng& rng) {
  if (p < 0.0 || p > 1.0) throw config_error("mask_modalities: p out of [0,1]");
  ModalityFrame out = frame;
  if (rng.uniform() < p) {
    out.speech.fill(0.0);
    out.kappa[0] = 0.0;
  }
  if (rng.uniform() < p) {
    out.face.fill(0.0);
    out.kappa[1] = 0.0;
  }
  if (rng.uniform() < p) {
    out.pose.fill(0.0);
    out.kappa[2] = 0.0;
  }
  return out;
}

}  // namespace isim::cohort
