// voiceval/align.h

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

#ifndef VOICEVAL_ALIGN_H_
#define VOICEVAL_ALIGN_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "voiceval/captions.h"
#include "voiceval/types.h"

namespace voiceval {

// Affine map into the shared space: out = x . W + b, W is in_dim x proj_dim.
struct ProjectionHead {
  Matrix W;
  Vector b;
};

Vector project(const ProjectionHead &head, const Vector &x);

// Learnable contrastive scale. tau = exp(log_tau) clamped to [1e-3, 100];
// the gradient is zeroed outside the clamp range.
struct Temperature {
  float log_tau = -2.6592600f;  // ln 0.07

  double tau() const;
  bool clamped() const;
};

// N voice/text pairs, index i <-> i. Both sides enter raw; clap_loss applies
// the projection heads and L2-normalizes inside.
struct PairedBatch {
  std::vector<Vector> voice;
  std::vector<Vector> text;
};

struct ClapGrads {
  Matrix voice_W;
  Vector voice_b;
  Matrix text_W;
  Vector text_b;
  double log_tau = 0.0;
  std::vector<Vector> voice_in;  // d loss / d raw voice inputs
  std::vector<Vector> text_in;   // d loss / d raw text inputs
};

// Symmetric two-direction InfoNCE:
//   S[i][j] = cos(proj_v(v_i), proj_z(z_j)) / tau
//   loss = 1/2 (mean_i CE(S[i,:], i) + mean_j CE(S[:,j], j))
// The column term is evaluated by running the row routine on the transposed
// matrix, so swapping the voice/text roles gives a bitwise identical loss.
// Errors on an empty batch, mismatched counts, or a zero-norm projection.
double clap_loss(const PairedBatch &batch, const ProjectionHead &voice_head,
                 const ProjectionHead &text_head, const Temperature &temp,
                 ClapGrads *grads = nullptr);

// Row+column mean CE of an explicit logit matrix against the diagonal.
// Shared by clap_loss and tests.
double symmetric_diagonal_ce(const std::vector<std::vector<double>> &logits);

// Whitespace-token text encoder: learnable token vectors, mean over the
// caption's tokens, then the text projection head, L2-normalized.
struct ToyTextEncoder {
  std::map<std::string, Vector> vocab;
  ProjectionHead projection;
};

// Errors on an empty token list or a token missing from the vocabulary.
Vector toy_text_encode(const ToyTextEncoder &encoder,
                       const std::vector<std::string> &tokens);

struct ClapModel {
  ProjectionHead voice_head;
  ToyTextEncoder text_encoder;
  Temperature temp;
};

// Projected, normalized voice embedding under a trained model.
Vector clap_project_voice(const ClapModel &model, const Vector &pooled);

struct ClapTrainConfig {
  std::size_t epochs = 200;
  float lr = 1e-2f;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  std::size_t proj_dim = 16;
  std::size_t text_dim = 16;
};

struct ClapTrainResult {
  ClapModel model;
  std::vector<double> step_loss;
};

// Adam over clap_loss with seeded shuffling; the last partial batch is kept.
// Heads start at W = 0 with distinct unit random biases, so the first-step
// similarity matrix is uniform and the initial loss equals ln(batch size).
// Token vectors start as seeded Gaussians. Deterministic for a fixed seed.
// Errors with fewer than 2 pairs.
ClapTrainResult clap_train(const std::vector<Vector> &voice,
                           const std::vector<std::vector<std::string>> &captions,
                           const ClapTrainConfig &cfg);

void save_clap_model(const ClapModel &model, const std::string &path);
ClapModel load_clap_model(const std::string &path);

struct RetrievalConfig {
  std::vector<std::size_t> ks = {1, 5, 10};
  std::size_t subset_size = 568;
  std::size_t n_subsets = 5;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct RetrievalResult {
  std::map<std::size_t, double> speech_to_text;  // recall@k, percent
  std::map<std::size_t, double> text_to_speech;
  std::size_t effective_subset_size = 0;
  bool subset_clamped = false;
};

// recall@k over n_subsets seeded subsets: the true item counts as retrieved
// when its rank is <= k, ties broken toward the lower index. Results are
// means over subsets, in percent. Errors on empty or unpaired sets.
RetrievalResult retrieval_eval(const std::vector<Vector> &voice_emb,
                               const std::vector<Vector> &text_emb,
                               const RetrievalConfig &cfg);

// Per-class embedding: mean of the encoded templates (each encoded vector is
// already L2-normalized; the mean is not re-normalized).
std::map<std::string, Vector> prompt_ensemble(const ToyTextEncoder &encoder,
                                              const TemplateSet &templates);

// argmax_i cos(v, class_embeddings[i]), ties to the lowest index.
std::size_t zsc_classify(const Vector &v,
                         const std::vector<Vector> &class_embeddings);

}  // namespace voiceval

#endif  // VOICEVAL_ALIGN_H_
