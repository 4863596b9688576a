// tests/test_align.cc

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

#include <cmath>

#include <doctest.h>

#include "test_util.h"
#include "voiceval/align.h"
#include "voiceval/ops.h"
#include "voiceval/rng.h"

using namespace voiceval;

namespace {

ProjectionHead random_head(SplitMix64 &rng, std::size_t in_dim,
                           std::size_t out_dim, float scale = 0.6f) {
  ProjectionHead head;
  head.W = testutil::random_matrix(rng, in_dim, out_dim, scale);
  head.b = testutil::random_vector(rng, out_dim, scale);
  return head;
}

PairedBatch random_batch(SplitMix64 &rng, std::size_t n, std::size_t voice_dim,
                         std::size_t text_dim) {
  PairedBatch batch;
  for (std::size_t i = 0; i < n; ++i) {
    batch.voice.push_back(testutil::random_vector(rng, voice_dim));
    batch.text.push_back(testutil::random_vector(rng, text_dim));
  }
  return batch;
}

}  // namespace

TEST_CASE("clap_loss worked values") {
  SplitMix64 rng(1);
  Temperature temp;

  // identical projections in every slot: uniform similarities, loss = ln N
  std::size_t n = 5;
  PairedBatch batch;
  Vector v = testutil::random_vector(rng, 4);
  Vector z = testutil::random_vector(rng, 4);
  for (std::size_t i = 0; i < n; ++i) {
    batch.voice.push_back(v);
    batch.text.push_back(z);
  }
  ProjectionHead vh = random_head(rng, 4, 3);
  ProjectionHead zh = random_head(rng, 4, 3);
  double loss = clap_loss(batch, vh, zh, temp);
  CHECK(loss == doctest::Approx(std::log(static_cast<double>(n)))
                    .epsilon(1e-6));

  // a single pair has no negatives
  PairedBatch one;
  one.voice.push_back(v);
  one.text.push_back(z);
  CHECK(clap_loss(one, vh, zh, temp) == doctest::Approx(0.0));

  // saturated diagonal logits: each CE is about 2e-9
  std::vector<std::vector<double>> sat = {{10.0, -10.0}, {-10.0, 10.0}};
  CHECK(symmetric_diagonal_ce(sat) ==
        doctest::Approx(std::log(1.0 + std::exp(-20.0))).epsilon(1e-6));
  CHECK(symmetric_diagonal_ce(sat) < 1e-8);

  PairedBatch empty;
  CHECK_THROWS(clap_loss(empty, vh, zh, temp));

  // zero-norm projection must error, not silently score
  ProjectionHead zero_head;
  zero_head.W = Matrix(4, 3, 0.0f);
  zero_head.b = Vector(3, 0.0f);
  CHECK_THROWS(clap_loss(one, zero_head, zh, temp));
}

TEST_CASE("clap_loss is exactly symmetric under modality swap") {
  SplitMix64 rng(2);
  Temperature temp;
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t n = 2 + rng.below(6);
    PairedBatch batch = random_batch(rng, n, 5, 4);
    ProjectionHead vh = random_head(rng, 5, 3);
    ProjectionHead zh = random_head(rng, 4, 3);

    PairedBatch swapped;
    swapped.voice = batch.text;
    swapped.text = batch.voice;
    double forward = clap_loss(batch, vh, zh, temp);
    double backward = clap_loss(swapped, zh, vh, temp);
    CHECK(forward == backward);  // bitwise
  }
}

TEST_CASE("clap_loss is invariant to positive rescaling of projections") {
  SplitMix64 rng(3);
  Temperature temp;
  PairedBatch batch = random_batch(rng, 4, 5, 5);
  ProjectionHead vh = random_head(rng, 5, 3);
  vh.b = Vector(3, 0.0f);  // keep the map linear so scaling is exact
  ProjectionHead zh = random_head(rng, 5, 3);
  double base = clap_loss(batch, vh, zh, temp);

  ProjectionHead scaled = vh;
  for (float &x : scaled.W.data) x *= 7.5f;
  double rescaled = clap_loss(batch, scaled, zh, temp);
  CHECK(rescaled == doctest::Approx(base).epsilon(1e-5));
}

TEST_CASE("clap_loss gradients match finite differences") {
  SplitMix64 rng(4);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 2 + rng.below(7);
    std::size_t voice_dim = 2 + rng.below(5);
    std::size_t text_dim = 2 + rng.below(5);
    std::size_t proj_dim = 2 + rng.below(4);
    PairedBatch batch = random_batch(rng, n, voice_dim, text_dim);
    ProjectionHead vh = random_head(rng, voice_dim, proj_dim);
    ProjectionHead zh = random_head(rng, text_dim, proj_dim);
    Temperature temp;
    temp.log_tau = static_cast<float>(rng.uniform_range(-2.7, 0.5));

    ClapGrads grads;
    clap_loss(batch, vh, zh, temp, &grads);

    // flatten: voice head | text head | log_tau | first voice | first text
    std::size_t nv = vh.W.data.size() + vh.b.dim();
    std::size_t nz = zh.W.data.size() + zh.b.dim();
    Vector flat(nv + nz + 1 + voice_dim + text_dim);
    std::size_t at = 0;
    auto push = [&](const std::vector<float> &xs) {
      for (float x : xs) flat[at++] = x;
    };
    push(vh.W.data);
    push(vh.b.data);
    push(zh.W.data);
    push(zh.b.data);
    flat[at++] = temp.log_tau;
    push(batch.voice[0].data);
    push(batch.text[0].data);

    auto eval = [&](const Vector &x) {
      ProjectionHead vh2 = vh, zh2 = zh;
      Temperature t2 = temp;
      PairedBatch b2 = batch;
      std::size_t p = 0;
      for (float &v : vh2.W.data) v = x[p++];
      for (float &v : vh2.b.data) v = x[p++];
      for (float &v : zh2.W.data) v = x[p++];
      for (float &v : zh2.b.data) v = x[p++];
      t2.log_tau = x[p++];
      for (float &v : b2.voice[0].data) v = x[p++];
      for (float &v : b2.text[0].data) v = x[p++];
      return clap_loss(b2, vh2, zh2, t2);
    };

    Vector analytic(flat.dim());
    at = 0;
    auto push_grad = [&](const std::vector<float> &xs) {
      for (float x : xs) analytic[at++] = x;
    };
    push_grad(grads.voice_W.data);
    push_grad(grads.voice_b.data);
    push_grad(grads.text_W.data);
    push_grad(grads.text_b.data);
    analytic[at++] = static_cast<float>(grads.log_tau);
    push_grad(grads.voice_in[0].data);
    push_grad(grads.text_in[0].data);

    Vector fd = finite_diff_grad(eval, flat, 1e-3);
    CHECK(testutil::grad_rel_err(analytic, fd) < 1e-3);
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("toy_text_encode worked values") {
  ToyTextEncoder enc;
  enc.vocab["a"] = Vector(std::vector<float>{1.0f, 0.0f});
  enc.vocab["b"] = Vector(std::vector<float>{0.0f, 1.0f});
  enc.projection.W = Matrix(2, 2, 0.0f);
  enc.projection.W.at(0, 0) = 1.0f;
  enc.projection.W.at(1, 1) = 1.0f;
  enc.projection.b = Vector(2, 0.0f);

  // single token: its (projected, normalized) vector
  Vector a = toy_text_encode(enc, {"a"});
  CHECK(a[0] == doctest::Approx(1.0));
  CHECK(a[1] == doctest::Approx(0.0));

  // repeated tokens leave the mean unchanged
  Vector aa = toy_text_encode(enc, {"a", "a", "a"});
  for (std::size_t i = 0; i < 2; ++i) CHECK(aa[i] == a[i]);

  // two tokens: normalized mean direction
  Vector ab = toy_text_encode(enc, {"a", "b"});
  CHECK(ab[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-6));
  CHECK(ab[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-6));

  CHECK_THROWS(toy_text_encode(enc, {}));
  CHECK_THROWS_WITH_AS(toy_text_encode(enc, {"nope"}),
                       doctest::Contains("unknown token"), std::runtime_error);
}

TEST_CASE("prompt_ensemble averages normalized encodings") {
  ToyTextEncoder enc;
  enc.vocab["x"] = Vector(std::vector<float>{2.0f, 0.0f});
  enc.vocab["y"] = Vector(std::vector<float>{0.0f, 3.0f});
  enc.projection.W = Matrix(2, 2, 0.0f);
  enc.projection.W.at(0, 0) = 1.0f;
  enc.projection.W.at(1, 1) = 1.0f;
  enc.projection.b = Vector(2, 0.0f);

  TemplateSet templates;
  templates["c0"] = {{"x"}, {"y"}};       // encodes to [1,0] and [0,1]
  templates["c1"] = {{"x"}, {"x"}};       // identical templates
  std::map<std::string, Vector> ensembles = prompt_ensemble(enc, templates);
  CHECK(ensembles.at("c0")[0] == doctest::Approx(0.5));
  CHECK(ensembles.at("c0")[1] == doctest::Approx(0.5));
  CHECK(ensembles.at("c1")[0] == doctest::Approx(1.0));
  CHECK(ensembles.at("c1")[1] == doctest::Approx(0.0));

  CHECK_THROWS(prompt_ensemble(enc, TemplateSet{}));
}

TEST_CASE("zsc_classify worked values and scale invariance") {
  std::vector<Vector> classes = {Vector(std::vector<float>{0.0f, 1.0f}),
                                 Vector(std::vector<float>{0.6f, 0.8f}),
                                 Vector(std::vector<float>{1.0f, 0.0f})};
  // matching a class embedding exactly selects it
  CHECK(zsc_classify(classes[2], classes) == 2);

  // cos([1,0], [0,1]) = 0 < cos([1,0], [.6,.8]) = .6
  Vector v(std::vector<float>{1.0f, 0.0f});
  std::vector<Vector> two = {classes[0], classes[1]};
  CHECK(zsc_classify(v, two) == 1);

  // positive rescaling changes nothing
  Vector scaled = v;
  for (std::size_t i = 0; i < scaled.dim(); ++i) scaled[i] *= 123.0f;
  CHECK(zsc_classify(scaled, two) == zsc_classify(v, two));

  // deterministic tie-break to the lowest index
  std::vector<Vector> tied = {Vector(std::vector<float>{1.0f, 0.0f}),
                              Vector(std::vector<float>{2.0f, 0.0f})};
  CHECK(zsc_classify(v, tied) == 0);

  CHECK_THROWS(zsc_classify(v, {}));
  CHECK_THROWS(zsc_classify(Vector(std::vector<float>{0.0f, 0.0f}), two));
}

TEST_CASE("retrieval_eval worked values") {
  // orthogonal paired embeddings: self-similarity strictly maximal
  std::vector<Vector> eye;
  for (int i = 0; i < 4; ++i) {
    Vector v(4, 0.0f);
    v[i] = 1.0f;
    eye.push_back(v);
  }
  RetrievalConfig cfg;
  cfg.ks = {1, 2};
  cfg.subset_size = 4;
  cfg.n_subsets = 2;
  RetrievalResult r = retrieval_eval(eye, eye, cfg);
  CHECK(r.speech_to_text.at(1) == doctest::Approx(100.0));
  CHECK(r.text_to_speech.at(1) == doctest::Approx(100.0));

  // k >= subset size retrieves everything; an oversized subset clamps
  RetrievalConfig big;
  big.ks = {10};
  big.subset_size = 9;
  big.n_subsets = 1;
  SplitMix64 rng(5);
  std::vector<Vector> voice, text;
  for (int i = 0; i < 4; ++i) {
    voice.push_back(testutil::random_vector(rng, 3));
    text.push_back(testutil::random_vector(rng, 3));
  }
  RetrievalResult all = retrieval_eval(voice, text, big);
  CHECK(all.speech_to_text.at(10) == doctest::Approx(100.0));
  CHECK(all.subset_clamped);

  CHECK_THROWS(retrieval_eval({}, {}, cfg));
}

TEST_CASE("retrieval hand-ranked 3x3 similarity") {
  // speech->text similarities [[.9,.1,.1],[.8,.2,.1],[.1,.1,.9]]:
  // row 1's true column scores .2 but column 0 scores .8, so R@1 = 2/3.
  // Realize the matrix with explicit embeddings: voice rows as unit basis
  // combinations is overkill; instead check the ranking rule directly via
  // cosine of crafted 3-d vectors built from the rows.
  std::vector<Vector> voice = {
      Vector(std::vector<float>{0.9f, 0.1f, 0.1f}),
      Vector(std::vector<float>{0.8f, 0.2f, 0.1f}),
      Vector(std::vector<float>{0.1f, 0.1f, 0.9f}),
  };
  std::vector<Vector> text;
  for (int i = 0; i < 3; ++i) {
    Vector v(3, 0.0f);
    v[i] = 1.0f;
    text.push_back(v);
  }
  RetrievalConfig cfg;
  cfg.ks = {1};
  cfg.subset_size = 3;
  cfg.n_subsets = 1;
  RetrievalResult r = retrieval_eval(voice, text, cfg);
  CHECK(r.speech_to_text.at(1) == doctest::Approx(100.0 * 2.0 / 3.0));
}

TEST_CASE("recall is nondecreasing in k and invariant to monotone transforms") {
  SplitMix64 rng(6);
  std::vector<Vector> voice, text;
  for (int i = 0; i < 12; ++i) {
    voice.push_back(testutil::random_vector(rng, 6));
    text.push_back(testutil::random_vector(rng, 6));
  }
  RetrievalConfig cfg;
  cfg.ks = {1, 2, 5, 12};
  cfg.subset_size = 8;
  cfg.n_subsets = 3;
  RetrievalResult r = retrieval_eval(voice, text, cfg);
  double prev = -1.0;
  for (std::size_t k : cfg.ks) {
    CHECK(r.speech_to_text.at(k) >= prev);
    prev = r.speech_to_text.at(k);
  }

  // a positive rescale of every voice vector is a strictly increasing
  // transform of each row's similarities
  std::vector<Vector> scaled = voice;
  for (Vector &v : scaled)
    for (std::size_t d = 0; d < v.dim(); ++d) v[d] *= 4.0f;
  RetrievalResult r2 = retrieval_eval(scaled, text, cfg);
  for (std::size_t k : cfg.ks) {
    CHECK(r2.speech_to_text.at(k) == r.speech_to_text.at(k));
    CHECK(r2.text_to_speech.at(k) == r.text_to_speech.at(k));
  }
}

TEST_CASE("clap_train determinism and frozen-lr behavior") {
  SplitMix64 rng(7);
  std::vector<Vector> voice;
  std::vector<std::vector<std::string>> captions;
  std::vector<std::string> tokens = {"t0", "t1", "t2", "t3"};
  for (int i = 0; i < 12; ++i) {
    voice.push_back(testutil::random_vector(rng, 6));
    captions.push_back({tokens[i % 4], tokens[(i + 1) % 4]});
  }
  ClapTrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 4;
  cfg.proj_dim = 4;
  cfg.text_dim = 4;
  cfg.seed = 9;

  ClapTrainResult a = clap_train(voice, captions, cfg);
  ClapTrainResult b = clap_train(voice, captions, cfg);
  REQUIRE(a.step_loss.size() == b.step_loss.size());
  for (std::size_t i = 0; i < a.step_loss.size(); ++i)
    CHECK(a.step_loss[i] == b.step_loss[i]);
  for (std::size_t i = 0; i < a.model.voice_head.W.data.size(); ++i)
    CHECK(a.model.voice_head.W.data[i] == b.model.voice_head.W.data[i]);

  // lr = 0 cannot move parameters, so the loss trace is constant per batch
  // layout; with full-batch training every step sees the same loss
  ClapTrainConfig frozen = cfg;
  frozen.lr = 0.0f;
  frozen.batch_size = voice.size();
  ClapTrainResult still = clap_train(voice, captions, frozen);
  for (double step_loss : still.step_loss)
    CHECK(step_loss == still.step_loss.front());

  CHECK_THROWS(clap_train({voice[0]}, {captions[0]}, cfg));
}

TEST_CASE("fresh clap heads start at ln N loss") {
  SplitMix64 rng(8);
  std::size_t n = 16;
  std::vector<Vector> voice;
  std::vector<std::vector<std::string>> captions;
  for (std::size_t i = 0; i < n; ++i) {
    voice.push_back(testutil::random_vector(rng, 8));
    captions.push_back({"tok" + std::to_string(i)});
  }
  ClapTrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = n;
  cfg.seed = 3;
  ClapTrainResult result = clap_train(voice, captions, cfg);
  CHECK(result.step_loss.front() ==
        doctest::Approx(std::log(static_cast<double>(n))).epsilon(1e-5));
}

TEST_CASE("clap model checkpoint round-trip") {
  std::string dir = testutil::scratch_dir("clap_ckpt");
  SplitMix64 rng(10);
  ClapModel model;
  model.voice_head = random_head(rng, 5, 3);
  model.text_encoder.projection = random_head(rng, 4, 3);
  model.text_encoder.vocab["hello"] = testutil::random_vector(rng, 4);
  model.text_encoder.vocab["world"] = testutil::random_vector(rng, 4);
  model.temp.log_tau = -1.5f;
  save_clap_model(model, dir + "/clap.audh");
  ClapModel loaded = load_clap_model(dir + "/clap.audh");
  CHECK(loaded.temp.log_tau == model.temp.log_tau);
  CHECK(loaded.text_encoder.vocab.size() == 2);
  for (std::size_t i = 0; i < 4; ++i)
    CHECK(loaded.text_encoder.vocab.at("hello")[i] ==
          model.text_encoder.vocab.at("hello")[i]);
}
