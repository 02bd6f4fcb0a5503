#pragma once

#include "isim/num/rng.hpp"
#include "isim/quest/items.hpp"

namespace isim::quest {

struct Interpretation {
  int likert;
  double confidence;  // in [0,1]
};

// Noisy-channel stand-in for the free-text answer interpreter. The latent
// score passes through unchanged with probability `fidelity`; otherwise a
// neighboring Likert value is reported (kept inside the instrument range).
// Confidence is 0.5 + 0.5*fidelity on clean reads and 0.5*fidelity on
// perturbed ones, so a fidelity-1 channel reports full confidence.
Interpretation interpret_answer(Instrument ins, int latent_score,
                                isim::num::Rng& rng, double fidelity);

}  // namespace isim::quest
