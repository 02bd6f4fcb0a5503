#pragma once

#include <cstdint>

#include "isim/cohort/profile.hpp"
#include "isim/num/rng.hpp"

namespace isim::cohort {

// Stratified cohort sampler. Profiles cycle through the ten strata formed
// by the five PHQ-8 severity bands crossed with PCL-C cluster-rule outcome,
// so every band and both PTSD labels appear in any cohort of n >= 10.
// Behavioral parameters correlate with severity: more severe profiles get
// longer latencies, stronger AU4, more gaze aversion and weaker AU12.
Cohort generate_cohort(int n, std::uint64_t seed);

// Speaker-disjoint split; the held-out set has round(fraction * n) patients.
// Both halves preserve the original cohort order.
std::pair<Cohort, Cohort> split_holdout(const Cohort& cohort, double fraction,
                                        std::uint64_t seed);

}  // namespace isim::cohort
