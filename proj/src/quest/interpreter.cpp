#include "isim/quest/interpreter.hpp"

#include "isim/errors.hpp"

namespace isim::quest {

Interpretation interpret_answer(Instrument ins, int latent_score,
                                isim::num::Rng& rng, double fidelity) {
  const int lo = likert_min(ins);
  const int hi = likert_max(ins);
  if (latent_score < lo || latent_score > hi)
    throw shape_error("interpret_answer: latent score out of range");
  if (fidelity < 0.0 || fidelity > 1.0)
    throw shape_error("interpret_answer: fidelity out of [0,1]");

  const bool clean = rng.uniform() < fidelity;
  if (clean) return {latent_score, 0.5 + 0.5 * fidelity};

  int neighbor = latent_score + (rng.uniform() < 0.5 ? -1 : 1);
  if (neighbor < lo || neighbor > hi) neighbor = 2 * latent_score - neighbor;
  return {neighbor, 0.5 * fidelity};
}

}  // namespace isim::quest
