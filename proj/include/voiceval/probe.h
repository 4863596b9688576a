// voiceval/probe.h

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

#ifndef VOICEVAL_PROBE_H_
#define VOICEVAL_PROBE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "voiceval/embedding.h"
#include "voiceval/manifest.h"
#include "voiceval/types.h"

namespace voiceval {

// Single affine layer on frame-level outputs. W is dim x n_classes so that
// logits = frame . W + b per frame.
struct ProbeHead {
  Matrix W;
  Vector b;
  std::string task;  // "sid" | "age" | "gender" | "emotion"
};

// Utterance logits: the mean over valid frames of per-frame logits. Averaging
// logits (not probabilities) keeps the exact linear identity
//   probe_forward(fe, head) == mean_pool(fe) . W + b
// up to rounding. Errors on dim mismatch or zero valid frames.
Vector probe_forward(const FrameEmbeddings &fe, const ProbeHead &head);

// Mean CE over a batch of pooled embeddings; optional gradient accumulation.
// Exposed so tests can check the analytic batch gradient directly.
double probe_batch_loss(const std::vector<Vector> &pooled,
                        const std::vector<std::size_t> &labels,
                        const Matrix &W, const Vector &b, Matrix *grad_W,
                        Vector *grad_b);

struct ProbeTrainConfig {
  std::size_t epochs = 50;
  float lr = 1e-3f;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
};

struct ProbeTrainResult {
  ProbeHead head;
  std::vector<std::string> classes;  // index -> label
  std::vector<double> epoch_loss;
};

// Adam on the mean CE with zero-initialized W, b and seeded per-epoch
// shuffling. Only utterances labeled for `task` participate; errors when
// there are none. Deterministic for a fixed seed.
ProbeTrainResult probe_train(const std::vector<FrameEmbeddings> &archive,
                             const std::vector<UtteranceRecord> &manifest,
                             Task task, const ProbeTrainConfig &cfg);

// Accuracy percent over labeled utterances (argmax of probe_forward, ties to
// the lowest index). Errors when the eval set is empty.
double probe_eval(const std::vector<FrameEmbeddings> &archive,
                  const std::vector<UtteranceRecord> &manifest,
                  const ProbeHead &head, const std::vector<std::string> &classes,
                  int threads = 1);

// Checkpoint io on the "AUDH" container (tag "probe:<task>").
void save_probe_head(const ProbeHead &head,
                     const std::vector<std::string> &classes,
                     const std::string &path);
struct LoadedProbeHead {
  ProbeHead head;
  std::vector<std::string> classes;
};
LoadedProbeHead load_probe_head(const std::string &path);

}  // namespace voiceval

#endif  // VOICEVAL_PROBE_H_
