#include "isim/cohort/generator.hpp"

#include <algorithm>
#include <cmath>

#include "isim/errors.hpp"

namespace isim::cohort {

using num::Rng;

double PatientProfile::severity() const {
  int phq = 0, pclc = 0;
  for (int s : phq8_latent) phq += s;
  for (int s : pclc_latent) pclc += s;
  return 0.5 * (phq / 24.0) + 0.5 * ((pclc - 17) / 68.0);
}

quest::PHQ8Response PatientProfile::phq8_response() const {
  return {phq8_latent};
}

quest::PCLCResponse PatientProfile::pclc_response() const {
  return {pclc_latent};
}

quest::ScreenResult true_screen(const PatientProfile& p, int phq_cutpoint,
                                int pclc_cutpoint) {
  return quest::screen(p.phq8_response(), p.pclc_response(), phq_cutpoint,
                       pclc_cutpoint);
}

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Draw PHQ-8 items summing to a target total inside the requested band.
void fill_phq8(PatientProfile& p, int band, Rng& rng) {
  static constexpr int lo[5] = {0, 5, 10, 15, 20};
  static constexpr int hi[5] = {4, 9, 14, 19, 24};
  const int target = lo[band] + static_cast<int>(rng.uniform_int(hi[band] - lo[band] + 1));
  p.phq8_latent.fill(0);
  int total = 0;
  while (total < target) {
    const int i = static_cast<int>(rng.uniform_int(quest::kPhq8Items));
    if (p.phq8_latent[i] < 3) {
      p.phq8_latent[i]++;
      total++;
    }
  }
}

// Draw PCL-C items with the requested cluster-rule outcome. Positive
// profiles get at least B>=1, C>=3, D>=2 symptomatic items; negative ones
// are built with one cluster kept below its threshold.
void fill_pclc(PatientProfile& p, bool positive, Rng& rng) {
  struct Span {
    int first, count, need;
  };
  static constexpr Span spans[3] = {{0, 5, 1}, {5, 7, 3}, {12, 5, 2}};
  for (auto& s : p.pclc_latent) s = 1 + static_cast<int>(rng.uniform_int(2));  // 1..2

  const int failing = positive ? -1 : static_cast<int>(rng.uniform_int(3));
  for (int c = 0; c < 3; ++c) {
    const auto& span = spans[c];
    int symptomatic;
    if (c == failing) {
      symptomatic = static_cast<int>(rng.uniform_int(span.need));  // below threshold
    } else if (positive) {
      symptomatic = span.need +
                    static_cast<int>(rng.uniform_int(span.count - span.need + 1));
    } else {
      symptomatic = static_cast<int>(rng.uniform_int(span.count + 1));
    }
    // Choose `symptomatic` distinct items in the cluster, score them 3..5.
    std::array<int, 7> idx{};
    for (int i = 0; i < span.count; ++i) idx[i] = span.first + i;
    for (int i = span.count - 1; i > 0; --i)
      std::swap(idx[i], idx[rng.uniform_int(static_cast<std::uint64_t>(i) + 1)]);
    for (int k = 0; k < symptomatic; ++k)
      p.pclc_latent[idx[k]] = 3 + static_cast<int>(rng.uniform_int(3));
  }
}

}  // namespace

Cohort generate_cohort(int n, std::uint64_t seed) {
  if (n < 1) throw config_error("generate_cohort: n must be >= 1");
  Cohort cohort;
  cohort.reserve(n);
  Rng rng(seed, 0);
  for (int i = 0; i < n; ++i) {
    PatientProfile p;
    p.id = i;
    const int band = i % 5;
    const bool ptsd_positive = (i / 5) % 2 == 0;
    fill_phq8(p, band, rng);
    fill_pclc(p, ptsd_positive, rng);

    const double sev = p.severity();
    p.base_latency = std::clamp(4.0 + 8.0 * sev + rng.normal(0, 0.8), 2.0, 14.0);
    p.utterance_scale =
        std::clamp(22.0 * (1.0 + 0.6 * sev) * std::exp(rng.normal(0, 0.15)), 8.0, 60.0);
    p.au4_intensity = clamp01(0.20 + 0.55 * sev + rng.normal(0, 0.08));
    p.au12_intensity = clamp01(0.75 - 0.55 * sev + rng.normal(0, 0.08));
    p.gaze_aversion = clamp01(0.15 + 0.60 * sev + rng.normal(0, 0.10));
    p.prosody_jitter = clamp01(0.10 + 0.50 * sev + rng.normal(0, 0.10));
    p.pause_rate = clamp01(0.15 + 0.50 * sev + rng.normal(0, 0.10));
    cohort.push_back(p);
  }
  return cohort;
}

std::pair<Cohort, Cohort> split_holdout(const Cohort& cohort, double fraction,
                                        std::uint64_t seed) {
  if (fraction <= 0.0 || fraction >= 1.0)
    throw config_error("split_holdout: fraction must be in (0,1)");
  const int n = static_cast<int>(cohort.size());
  const int held = static_cast<int>(std::llround(fraction * n));
  if (held < 1 || held >= n)
    throw config_error("split_holdout: fraction leaves an empty side");

  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed, 1);
  for (int i = n - 1; i > 0; --i)
    std::swap(idx[i], idx[rng.uniform_int(static_cast<std::uint64_t>(i) + 1)]);

  std::vector<bool> is_held(n, false);
  for (int i = 0; i < held; ++i) is_held[idx[i]] = true;

  Cohort train, holdout;
  train.reserve(n - held);
  holdout.reserve(held);
  for (int i = 0; i < n; ++i) (is_held[i] ? holdout : train).push_back(cohort[i]);
  return {std::move(train), std::move(holdout)};
}

}  // namespace isim::cohort
