#include <cmath>
#include <set>

#include "doctest.h"
#include "isim/cohort/features.hpp"
#include "isim/cohort/generator.hpp"
#include "isim/cohort/io.hpp"
#include "isim/errors.hpp"

using namespace isim;
using namespace isim::cohort;

TEST_CASE("generate_cohort: size, distinct ids, determinism") {
  const auto cohort = generate_cohort(276, 42);
  REQUIRE(cohort.size() == 276);
  std::set<std::int64_t> ids;
  for (const auto& p : cohort) ids.insert(p.id);
  CHECK(ids.size() == 276);

  const auto again = generate_cohort(276, 42);
  CHECK(cohort_to_text(cohort) == cohort_to_text(again));

  const auto other = generate_cohort(276, 43);
  CHECK(cohort_to_text(cohort) != cohort_to_text(other));

  CHECK_THROWS_AS(generate_cohort(0, 1), config_error);
}

TEST_CASE("generate_cohort: every severity band and both PTSD labels appear") {
  const auto cohort = generate_cohort(276, 7);
  std::set<int> bands;
  int ptsd_pos = 0, ptsd_neg = 0;
  for (const auto& p : cohort) {
    const auto truth = true_screen(p);
    bands.insert(static_cast<int>(truth.phq8_band));
    (truth.pclc_cluster_positive ? ptsd_pos : ptsd_neg)++;
    // Latents are valid instrument responses by construction.
    for (int s : p.phq8_latent) CHECK((s >= 0 && s <= 3));
    for (int s : p.pclc_latent) CHECK((s >= 1 && s <= 5));
  }
  CHECK(bands.size() == 5);
  CHECK(ptsd_pos > 50);
  CHECK(ptsd_neg > 50);
}

TEST_CASE("generate_cohort: gaze aversion correlates with PHQ-8 severity") {
  const auto cohort = generate_cohort(2000, 11);
  double mx = 0, my = 0;
  for (const auto& p : cohort) {
    mx += true_screen(p).phq8_total;
    my += p.gaze_aversion;
  }
  mx /= cohort.size();
  my /= cohort.size();
  double sxy = 0, sxx = 0, syy = 0;
  for (const auto& p : cohort) {
    const double dx = true_screen(p).phq8_total - mx;
    const double dy = p.gaze_aversion - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  const double corr = sxy / std::sqrt(sxx * syy);
  CHECK(corr > 0.3);
  CHECK(corr < 0.8);
}

TEST_CASE("emit_turn_features: jitter floor, severity lengthens answers, kappa range") {
  auto cohort = generate_cohort(4, 3);
  auto& p = cohort[0];

  SUBCASE("zero prosody jitter pins speech noise to the documented floor") {
    p.prosody_jitter = 0.0;
    num::Rng rng(5, 2);
    const quest::ItemId item{quest::Instrument::PHQ8, 1, quest::Cluster::None};
    double sum = 0, sq = 0;
    const int n = 4000;
    for (int i = 0; i < n; ++i) {
      const auto tf = emit_turn_features(p, item, rng);
      sum += tf.frame.speech[7];
      sq += tf.frame.speech[7] * tf.frame.speech[7];
    }
    const double var = sq / n - (sum / n) * (sum / n);
    CHECK(std::sqrt(var) == doctest::Approx(kSpeechNoiseFloor).epsilon(0.15));
  }

  SUBCASE("a severity-3 item draws longer utterances than a severity-0 item") {
    p.phq8_latent[0] = 0;
    p.phq8_latent[1] = 3;
    num::Rng rng(6, 2);
    const quest::ItemId low{quest::Instrument::PHQ8, 1, quest::Cluster::None};
    const quest::ItemId high{quest::Instrument::PHQ8, 2, quest::Cluster::None};
    double mean_low = 0, mean_high = 0;
    for (int i = 0; i < 1000; ++i) {
      mean_low += emit_turn_features(p, low, rng).utterance_duration;
      mean_high += emit_turn_features(p, high, rng).utterance_duration;
    }
    CHECK(mean_high / 1000 > mean_low / 1000);
  }

  SUBCASE("kappa components stay in [0,1] and dip below 0.5 about 5% of turns") {
    num::Rng rng(7, 2);
    const quest::ItemId item{quest::Instrument::PCLC, 3, quest::Cluster::B};
    int dips = 0, total = 0;
    for (int i = 0; i < 4000; ++i) {
      const auto tf = emit_turn_features(p, item, rng);
      for (double k : tf.frame.kappa) {
        CHECK(k >= 0.0);
        CHECK(k <= 1.0);
        dips += (k < 0.5);
        ++total;
      }
    }
    CHECK(std::abs(dips / static_cast<double>(total) - 0.05) < 0.012);
  }
}

TEST_CASE("perturb_counterfactual: zero bounds, boundary, bounded shifts") {
  auto cohort = generate_cohort(1, 9);
  num::Rng rng(8, 3);
  const quest::ItemId item{quest::Instrument::PHQ8, 4, quest::Cluster::None};
  auto tf = emit_turn_features(cohort[0], item, rng);

  SUBCASE("all-zero bounds leave the frame unchanged") {
    CounterfactualBounds zero{0, 0, 0, 0, 0};
    const auto out = perturb_counterfactual(tf.frame, zero, rng);
    CHECK(out.face == tf.frame.face);
    CHECK(out.speech == tf.frame.speech);
  }

  SUBCASE("AU4 at the physical ceiling never escapes [0,1]") {
    tf.frame.face[kFaceAu4] = 1.0;
    CounterfactualBounds b;
    for (int i = 0; i < 500; ++i) {
      const auto out = perturb_counterfactual(tf.frame, b, rng);
      CHECK(out.face[kFaceAu4] <= 1.0);
      CHECK(out.face[kFaceAu4] >= 1.0 - b.au4);
    }
  }

  SUBCASE("1k perturbations respect every per-channel bound") {
    CounterfactualBounds b;
    for (int i = 0; i < 1000; ++i) {
      const auto out = perturb_counterfactual(tf.frame, b, rng);
      CHECK(std::abs(out.face[kFaceAu4] - tf.frame.face[kFaceAu4]) <= b.au4);
      CHECK(std::abs(out.face[kFaceAu12] - tf.frame.face[kFaceAu12]) <= b.au12);
      CHECK(std::abs(out.face[kFaceGaze] - tf.frame.face[kFaceGaze]) <= b.gaze);
      CHECK(std::abs(out.speech[kSpeechJitter] - tf.frame.speech[kSpeechJitter]) <=
            b.jitter);
      CHECK(std::abs(out.speech[kSpeechPause] - tf.frame.speech[kSpeechPause]) <=
            b.pause);
      for (double v : out.face) CHECK((v >= 0.0 && v <= 1.0));
      for (double v : out.speech) CHECK((v >= 0.0 && v <= 1.0));
    }
  }

  SUBCASE("absurd bounds are rejected after resampling") {
    CounterfactualBounds huge;
    huge.au4 = 1e9;
    CHECK_THROWS_AS(perturb_counterfactual(tf.frame, huge, rng), config_error);
  }
}

TEST_CASE("split_holdout: paper fraction, lower guard, exact partition") {
  const auto cohort = generate_cohort(276, 21);
  auto [train, held] = split_holdout(cohort, 0.2, 1);
  CHECK(held.size() == 55);
  CHECK(train.size() == 221);

  auto [train1, held1] = split_holdout(cohort, 1.0 / 276, 1);
  CHECK(held1.size() == 1);

  std::set<std::int64_t> ids;
  for (const auto& p : train) ids.insert(p.id);
  for (const auto& p : held) {
    CHECK_FALSE(ids.contains(p.id));
    ids.insert(p.id);
  }
  CHECK(ids.size() == 276);

  CHECK_THROWS_AS(split_holdout(cohort, 0.0, 1), config_error);
  CHECK_THROWS_AS(split_holdout(cohort, 1.0, 1), config_error);
}

TEST_CASE("mask_modalities: identity, total blackout, rate calibration") {
  auto cohort = generate_cohort(1, 13);
  num::Rng rng(10, 4);
  const quest::ItemId item{quest::Instrument::PCLC, 9, quest::Cluster::C};
  const auto tf = emit_turn_features(cohort[0], item, rng);

  const auto same = mask_modalities(tf.frame, 0.0, rng);
  CHECK(same.speech == tf.frame.speech);
  CHECK(same.kappa == tf.frame.kappa);

  const auto dark = mask_modalities(tf.frame, 1.0, rng);
  for (double v : dark.speech) CHECK(v == 0.0);
  for (double v : dark.face) CHECK(v == 0.0);
  for (double v : dark.pose) CHECK(v == 0.0);
  for (double v : dark.kappa) CHECK(v == 0.0);

  int masked[3] = {0, 0, 0};
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto out = mask_modalities(tf.frame, 0.2, rng);
    masked[0] += (out.kappa[0] == 0.0);
    masked[1] += (out.kappa[1] == 0.0);
    masked[2] += (out.kappa[2] == 0.0);
  }
  for (int m = 0; m < 3; ++m)
    CHECK(std::abs(masked[m] / static_cast<double>(n) - 0.2) < 0.01);
}

TEST_CASE("cohort io: text round-trip is exact") {
  const auto cohort = generate_cohort(31, 77);
  const auto text = cohort_to_text(cohort);
  const auto back = cohort_from_text(text);
  CHECK(cohort_to_text(back) == text);
  CHECK_THROWS_AS(cohort_from_text("bogus"), io_error);
}
