// tests/test_speaker_eval.cc

// Copyright 2026  Voiceval Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <set>

#include <doctest.h>

#include "test_util.h"
#include "voiceval/ops.h"
#include "voiceval/speaker_eval.h"
#include "voiceval/synth.h"

using namespace voiceval;

namespace {

// Independent exhaustive EER: recounts FAR/FRR from scratch at every distinct
// score, then interpolates at the crossing by the same definition. Kept free
// of any code shared with compute_eer's sweep.
double brute_force_eer(const std::vector<double> &scores,
                       const std::vector<std::uint8_t> &labels) {
  std::vector<double> thresholds = scores;
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());

  std::size_t n_target = 0, n_nontarget = 0;
  for (std::uint8_t l : labels) (l ? n_target : n_nontarget)++;

  auto point = [&](std::size_t k) {
    // k in [0, m] where m points are at thresholds and point m is
    // "reject everything"
    if (k == thresholds.size()) return std::make_pair(0.0, 1.0);
    double t = thresholds[k];
    std::size_t fa = 0, fr = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (!labels[i] && scores[i] >= t) ++fa;
      if (labels[i] && scores[i] < t) ++fr;
    }
    return std::make_pair(static_cast<double>(fa) / n_nontarget,
                          static_cast<double>(fr) / n_target);
  };

  std::size_t k = 0;
  auto [far, frr] = point(0);
  while (frr < far) {
    ++k;
    std::tie(far, frr) = point(k);
  }
  if (frr == far) return 100.0 * far;
  auto [pfar, pfrr] = point(k - 1);
  double denom = (frr - pfrr) - (far - pfar);
  double alpha = denom != 0.0 ? (pfar - pfrr) / denom : 1.0;
  return 100.0 * (pfar + alpha * (far - pfar));
}

}  // namespace

TEST_CASE("compute_eer worked values") {
  // perfect separation
  CHECK(compute_eer({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}).eer_percent ==
        doctest::Approx(0.0));

  // crossing exactly at FAR = FRR = 1/3
  EerResult r = compute_eer({0.9, 0.7, 0.6, 0.8, 0.3, 0.2},
                            {1, 1, 1, 0, 0, 0});
  CHECK(r.eer_percent == doctest::Approx(100.0 / 3.0).epsilon(1e-9));

  CHECK_THROWS(compute_eer({0.5, 0.4}, {1, 1}));
  CHECK_THROWS(compute_eer({0.5}, {0}));
}

TEST_CASE("compute_eer equals the exhaustive sweep on 1000 seeded sets") {
  SplitMix64 rng(101);
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t n = 4 + rng.below(197);
    std::vector<double> scores;
    std::vector<std::uint8_t> labels;
    std::size_t n_target = 1 + rng.below(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
      labels.push_back(i < n_target ? 1 : 0);
      // quantized scores provoke ties across the two classes
      double s = rng.uniform();
      if (rng.below(4) == 0) s = std::round(s * 8.0) / 8.0;
      if (labels.back()) s += 0.4 * rng.uniform();
      scores.push_back(s);
    }
    double mine = compute_eer(scores, labels).eer_percent;
    double oracle = brute_force_eer(scores, labels);
    CHECK(mine == oracle);
  }
}

TEST_CASE("same-distribution scores give EER near 50") {
  SplitMix64 rng(202);
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  for (int i = 0; i < 10000; ++i) {
    scores.push_back(rng.uniform());
    labels.push_back(i % 2 == 0);
  }
  double eer = compute_eer(scores, labels).eer_percent;
  CHECK(eer > 48.0);
  CHECK(eer < 52.0);
}

TEST_CASE("score_trials worked values") {
  SynthConfig cfg;
  cfg.seed = 7;
  cfg.n_speakers = 2;
  cfg.utts_per_speaker = 2;
  cfg.dim = 8;
  cfg.frames_per_utt = 3;
  cfg.noise_sigma = 0.0f;
  cfg.emotion_classes = 1;  // same attributes for all utterances of a speaker
  default_attribute_offsets(cfg, 0.0f);
  SynthCorpus corpus = generate_corpus(cfg);

  // identical utterances score exactly 1
  std::vector<Trial> trials = {{"spk0000-u0", "spk0000-u0", true},
                               {"spk0000-u0", "spk0000-u1", true}};
  auto scored = score_trials(corpus.embeddings, trials);
  CHECK(scored[0].score == doctest::Approx(1.0));
  // same speaker, same attributes, no noise: identical centroids
  CHECK(scored[1].score == doctest::Approx(1.0));

  CHECK_THROWS_WITH_AS(
      score_trials(corpus.embeddings, {{"missing", "spk0000-u0", false}}),
      doctest::Contains("missing"), std::runtime_error);
}

TEST_CASE("trials file round-trip") {
  std::string dir = testutil::scratch_dir("trials");
  std::vector<Trial> trials = {{"a", "b", true}, {"c", "d", false}};
  save_trials(trials, dir + "/t.txt");
  std::vector<Trial> loaded = load_trials(dir + "/t.txt");
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].is_target);
  CHECK_FALSE(loaded[1].is_target);
  CHECK(loaded[1].enroll_utt == "c");
}

TEST_CASE("cluster_embeddings worked values") {
  ClusteringParams params;
  params.stop_threshold = 0.5;

  // all identical vectors collapse to one cluster
  std::vector<Vector> same(5, Vector(std::vector<float>{1.0f, 2.0f}));
  std::vector<std::size_t> labels = cluster_embeddings(same, params);
  for (std::size_t l : labels) CHECK(l == 0);

  // two orthogonal tight groups split at threshold 0.5
  std::vector<Vector> groups;
  SplitMix64 rng(31);
  for (int i = 0; i < 4; ++i) {
    Vector v(std::vector<float>{1.0f, 0.0f, 0.0f});
    v[1] = 0.01f * rng.gaussian();
    groups.push_back(v);
  }
  for (int i = 0; i < 4; ++i) {
    Vector v(std::vector<float>{0.0f, 1.0f, 0.0f});
    v[2] = 0.01f * rng.gaussian();
    groups.push_back(v);
  }
  labels = cluster_embeddings(groups, params);
  for (int i = 0; i < 4; ++i) {
    CHECK(labels[i] == 0);
    CHECK(labels[4 + i] == 1);
  }

  // threshold extremes: everything merges vs nothing merges
  ClusteringParams wide;
  wide.stop_threshold = 1.999;
  labels = cluster_embeddings(groups, wide);
  for (std::size_t l : labels) CHECK(l == 0);

  ClusteringParams narrow;
  narrow.stop_threshold = 1e-9;
  labels = cluster_embeddings(groups, narrow);
  std::set<std::size_t> distinct(labels.begin(), labels.end());
  CHECK(distinct.size() == groups.size());
}

TEST_CASE("clustering is permutation invariant up to relabeling") {
  SplitMix64 rng(57);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Vector> points;
    for (int g = 0; g < 3; ++g) {
      Vector center = testutil::random_vector(rng, 6);
      center = l2_normalize(center);
      for (int i = 0; i < 4; ++i) {
        Vector v = center;
        for (std::size_t d = 0; d < v.dim(); ++d)
          v[d] += 0.02f * rng.gaussian();
        points.push_back(v);
      }
    }
    ClusteringParams params;
    params.stop_threshold = 0.4;
    std::vector<std::size_t> base = cluster_embeddings(points, params);

    std::vector<std::size_t> perm(points.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    rng.shuffle(perm);
    std::vector<Vector> shuffled(points.size());
    for (std::size_t i = 0; i < perm.size(); ++i)
      shuffled[i] = points[perm[i]];
    std::vector<std::size_t> relabeled = cluster_embeddings(shuffled, params);

    // compare as partitions over original indices
    auto partition = [](const std::vector<std::size_t> &labels,
                        const std::vector<std::size_t> *perm_map) {
      std::map<std::size_t, std::set<std::size_t>> parts;
      for (std::size_t i = 0; i < labels.size(); ++i)
        parts[labels[i]].insert(perm_map ? (*perm_map)[i] : i);
      std::set<std::set<std::size_t>> out;
      for (auto &[label, members] : parts) out.insert(members);
      return out;
    };
    CHECK(partition(base, nullptr) == partition(relabeled, &perm));
  }
}

TEST_CASE("min_cluster_size absorbs stragglers") {
  std::vector<Vector> points;
  for (int i = 0; i < 5; ++i)
    points.push_back(Vector(std::vector<float>{1.0f, 0.0f}));
  points.push_back(Vector(std::vector<float>{0.9f, 0.4f}));  // near the group
  ClusteringParams params;
  params.stop_threshold = 0.01;
  params.min_cluster_size = 2;
  std::vector<std::size_t> labels = cluster_embeddings(points, params);
  CHECK(labels[5] == labels[0]);
}

TEST_CASE("diarize on a noise-free session recovers exact boundaries") {
  SynthConfig cfg;
  cfg.seed = 21;
  cfg.n_speakers = 2;
  cfg.dim = 8;
  cfg.noise_sigma = 0.0f;
  default_attribute_offsets(cfg, 0.2f);
  DiarSessionSet set = generate_diar_sessions(cfg, 1, 2, 4, 2.0, 2.0);

  ClusteringParams params;
  params.stop_threshold = 0.5;
  std::vector<DiarSegment> hyp = diarize(set.sessions[0], 1.0, 1.0, params);
  DerResult der = compute_der(set.reference, hyp, 0.0);
  CHECK(der.der_percent == doctest::Approx(0.0));

  // a single-speaker session yields one segment spanning the session
  DiarSessionSet solo = generate_diar_sessions(cfg, 1, 1, 3, 2.0, 2.0);
  std::vector<DiarSegment> one = diarize(solo.sessions[0], 1.0, 1.0, params);
  REQUIRE(one.size() == 1);
  CHECK(one[0].start_s == doctest::Approx(0.0));
  CHECK(one[0].end_s == doctest::Approx(6.0));
}

TEST_CASE("diarize boundary error is bounded by one window") {
  // 2.5 s turns with a 1 s window: one window straddles each boundary, so
  // hypothesis boundaries may be off by at most the window length
  SynthConfig cfg;
  cfg.seed = 22;
  cfg.n_speakers = 2;
  cfg.dim = 8;
  cfg.noise_sigma = 0.0f;
  default_attribute_offsets(cfg, 0.2f);
  DiarSessionSet set = generate_diar_sessions(cfg, 1, 2, 4, 2.5, 2.5);
  ClusteringParams params;
  params.stop_threshold = 0.5;
  std::vector<DiarSegment> hyp = diarize(set.sessions[0], 1.0, 1.0, params);
  const double window = 1.0;
  for (const DiarSegment &ref : set.reference) {
    bool found = false;
    for (const DiarSegment &h : hyp)
      if (std::abs(h.start_s - ref.start_s) <= window) found = true;
    CHECK(found);
  }
  // total mislabeled time stays under one window per internal boundary
  DerResult der = compute_der(set.reference, hyp, 0.0);
  CHECK(der.der_percent <= 100.0 * 3.0 * window / 10.0);
}

TEST_CASE("compute_der worked values") {
  // hyp == ref scores zero
  std::vector<DiarSegment> ref = {{"s", 0.0, 5.0, "A"}, {"s", 5.0, 10.0, "B"}};
  DerResult zero = compute_der(ref, ref, 0.0);
  CHECK(zero.der_percent == doctest::Approx(0.0));
  CHECK(zero.miss_percent == doctest::Approx(0.0));
  CHECK(zero.false_alarm_percent == doctest::Approx(0.0));
  CHECK(zero.confusion_percent == doctest::Approx(0.0));

  // 2 s missed of 10 s
  std::vector<DiarSegment> ref1 = {{"s", 0.0, 10.0, "A"}};
  std::vector<DiarSegment> hyp1 = {{"s", 0.0, 8.0, "X"}};
  DerResult miss = compute_der(ref1, hyp1, 0.0);
  CHECK(miss.miss_percent == doctest::Approx(20.0));
  CHECK(miss.der_percent == doctest::Approx(20.0));
  CHECK(miss.confusion_percent == doctest::Approx(0.0));

  // X maps to A, Y maps to B; X's 8-10 s stretch sits inside B's span
  std::vector<DiarSegment> hyp2 = {
      {"s", 0.0, 5.0, "X"}, {"s", 5.0, 8.0, "Y"}, {"s", 8.0, 10.0, "X"}};
  DerResult conf = compute_der(ref, hyp2, 0.0);
  CHECK(conf.confusion_percent == doctest::Approx(20.0));
  CHECK(conf.der_percent == doctest::Approx(20.0));
  CHECK(conf.miss_percent == doctest::Approx(0.0));
  CHECK(conf.false_alarm_percent == doctest::Approx(0.0));

  CHECK_THROWS(compute_der({}, hyp2, 0.0));
}

TEST_CASE("DER is zero on random self-scored segmentations and invariant to "
          "hypothesis renaming") {
  SplitMix64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<DiarSegment> ref;
    double cursor = 0.0;
    std::size_t n = 1 + rng.below(6);
    for (std::size_t i = 0; i < n; ++i) {
      double len = 0.5 + 2.0 * rng.uniform();
      ref.push_back({"s", cursor, cursor + len,
                     "spk" + std::to_string(rng.below(3))});
      cursor += len;
      if (rng.below(3) == 0) cursor += rng.uniform();  // gaps allowed
    }
    CHECK(compute_der(ref, ref, 0.0).der_percent == doctest::Approx(0.0));

    // renaming hypothesis speakers must not change the score
    std::vector<DiarSegment> renamed = ref;
    for (DiarSegment &seg : renamed) seg.speaker = "z" + seg.speaker;
    DerResult a = compute_der(ref, ref, 0.0);
    DerResult b = compute_der(ref, renamed, 0.0);
    CHECK(a.der_percent == doctest::Approx(b.der_percent));
    CHECK(b.der_percent == doctest::Approx(0.0));
  }
}

TEST_CASE("DER with a collar excludes boundary zones") {
  std::vector<DiarSegment> ref = {{"s", 0.0, 10.0, "A"}};
  std::vector<DiarSegment> hyp = {{"s", 0.25, 10.0, "X"}};
  // the 0-0.25 miss falls inside a 0.25 s collar around the ref start
  DerResult with_collar = compute_der(ref, hyp, 0.25);
  CHECK(with_collar.der_percent == doctest::Approx(0.0));
  DerResult no_collar = compute_der(ref, hyp, 0.0);
  CHECK(no_collar.miss_percent == doctest::Approx(2.5));
}

TEST_CASE("DER >= confusion and multi-session aggregation") {
  std::vector<DiarSegment> ref = {{"a", 0.0, 4.0, "A"}, {"b", 0.0, 6.0, "B"}};
  std::vector<DiarSegment> hyp = {{"a", 0.0, 4.0, "X"}, {"b", 0.0, 3.0, "Y"}};
  DerResult total = compute_der_multi(ref, hyp, 0.0);
  CHECK(total.der_percent >= total.confusion_percent);
  CHECK(total.scored_time_s == doctest::Approx(10.0));
  CHECK(total.miss_percent == doctest::Approx(30.0));
}

TEST_CASE("counting_mae worked values") {
  std::map<std::string, std::size_t> ref = {{"a", 2}, {"b", 4}};
  CHECK(counting_mae(ref, ref) == doctest::Approx(0.0));
  std::map<std::string, std::size_t> hyp = {{"a", 3}, {"b", 4}};
  CHECK(counting_mae(ref, hyp) == doctest::Approx(0.5));
  std::map<std::string, std::size_t> one_ref = {{"a", 2}};
  std::map<std::string, std::size_t> one_hyp = {{"a", 5}};
  CHECK(counting_mae(one_ref, one_hyp) == doctest::Approx(3.0));
  CHECK_THROWS(counting_mae(ref, one_hyp));
}

TEST_CASE("rttm round-trip") {
  std::string dir = testutil::scratch_dir("rttm");
  std::vector<DiarSegment> segs = {{"sess0", 0.0, 2.5, "spk0"},
                                   {"sess0", 2.5, 4.0, "spk1"},
                                   {"sess1", 0.0, 1.0, "spk0"}};
  save_rttm(segs, dir + "/r.rttm");
  std::vector<DiarSegment> loaded = load_rttm(dir + "/r.rttm");
  REQUIRE(loaded.size() == 3);
  CHECK(loaded[0].end_s == doctest::Approx(2.5));
  CHECK(loaded[1].speaker == "spk1");
  CHECK(loaded[2].session_id == "sess1");

  auto counts = speaker_counts(loaded);
  CHECK(counts.at("sess0") == 2);
  CHECK(counts.at("sess1") == 1);
}
