// voiceval/multitask.h

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

#ifndef VOICEVAL_MULTITASK_H_
#define VOICEVAL_MULTITASK_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "voiceval/align.h"
#include "voiceval/embedding.h"
#include "voiceval/manifest.h"
#include "voiceval/probe.h"
#include "voiceval/types.h"

namespace voiceval {

// Small trainable stand-in for a frame-level encoder: group-average every
// `downsample` consecutive frames (the trailing partial group averages its
// own members), then affine -> ReLU -> affine per frame. The output frame
// rate is the input rate divided by the downsample factor.
struct ToyEncoder {
  ProjectionHead layer1;  // feat_dim -> hidden
  ProjectionHead layer2;  // hidden -> out_dim
  std::size_t downsample = 1;
};

FrameEmbeddings encoder_forward(const Matrix &features, const ToyEncoder &enc,
                                float input_frame_rate_hz = 25.0f,
                                const std::string &utt_id = "");

// Runs every archive entry's valid frames through the encoder.
std::vector<FrameEmbeddings> encode_archive(
    const std::vector<FrameEmbeddings> &archive, const ToyEncoder &enc);

struct TaskHeadSet {
  std::map<Task, ProbeHead> heads;
  std::map<Task, float> weights;  // lambda per task, >= 0
};

struct AffineGrads {
  Matrix W;
  Vector b;
};

struct EncoderGrads {
  AffineGrads layer1;
  AffineGrads layer2;
};

struct MultitaskItem {
  Matrix features;                     // T x feat_dim
  std::map<Task, std::size_t> labels;  // class index per task (true or pseudo)
};

// Sum over tasks with positive weight of lambda_t * mean-CE over the batch
// items labeled for that task, with logits = probe head on the pooled
// encoder output. With allow_missing = false an item lacking a label for an
// active task is an error (the pseudo-labeling-disabled contract); with
// allow_missing = true the item is skipped for that task.
double multitask_loss(const std::vector<MultitaskItem> &batch,
                      const ToyEncoder &enc, const TaskHeadSet &heads,
                      EncoderGrads *enc_grads,
                      std::map<Task, AffineGrads> *head_grads,
                      std::map<Task, double> *per_task_loss,
                      bool allow_missing = false);

struct PseudoLabelPolicy {
  double confidence_threshold = 0.9;
  std::size_t refresh_every_epochs = 1;
};

// argmax of probe_forward when its softmax peak reaches the confidence
// threshold, absent otherwise.
std::optional<std::size_t> pseudo_label(const FrameEmbeddings &fe,
                                        const ProbeHead &head,
                                        const PseudoLabelPolicy &policy);

// Additive-angular-margin CE on cosine logits: the true-class logit is
// s*cos(theta + m), the rest s*cos(theta). Inputs must arrive L2-normalized
// (embedding and every class weight row); non-normalized inputs error.
// class_weights is n_classes x dim. Optional gradients are accumulated.
double margin_softmax_ce(const Vector &embedding, const Matrix &class_weights,
                         std::size_t label, float margin, float scale,
                         Vector *grad_embedding, Matrix *grad_weights);

// Softmax-variant generalized end-to-end loss with self-exclusive centroids:
// each utterance scores w*cos(x, centroid_k) + b against every speaker, where
// its own speaker's centroid excludes the utterance itself; CE against the
// own-speaker column, averaged over all utterances. Needs >= 2 speakers and
// >= 2 utterances per speaker; w must stay positive.
double ge2e_loss(const std::vector<std::vector<Vector>> &speaker_groups,
                 float w, float b,
                 std::vector<std::vector<Vector>> *grad_embeddings,
                 double *grad_w, double *grad_b);

struct TraceRow {
  std::size_t step = 0;
  double loss = 0.0;
  std::map<Task, double> per_task;
};

struct MultitaskTrainConfig {
  std::map<Task, float> task_weights;  // default: all four tasks at 1.0
  std::size_t hidden = 64;
  std::size_t out_dim = 0;  // 0 -> feature dim
  std::size_t downsample = 1;
  std::size_t epochs = 50;
  float lr = 3e-3f;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  bool pseudo_labels = false;
  PseudoLabelPolicy pseudo_policy;
};

struct MultitaskTrainResult {
  ToyEncoder encoder;
  TaskHeadSet heads;
  std::map<Task, std::vector<std::string>> classes;
  std::vector<TraceRow> trace;
};

// Joint Adam over multitask_loss: Glorot-uniform seeded encoder init, zero
// heads, seeded shuffling, optional pseudo-label refresh per policy.
// Deterministic per seed; aborts with a diagnostic on a non-finite loss.
MultitaskTrainResult multitask_train(
    const std::vector<FrameEmbeddings> &archive,
    const std::vector<UtteranceRecord> &manifest,
    const MultitaskTrainConfig &cfg);

void save_encoder(const ToyEncoder &enc, const std::string &path);
ToyEncoder load_encoder(const std::string &path);
void save_task_heads(const MultitaskTrainResult &result,
                     const std::string &path);

// Temporal adaptor bridging encoder frames into a language-model embedding
// width: stack (default) or average each group of `group` consecutive valid
// frames, zero-padding the trailing stack group, then affine -> ReLU ->
// affine. Output rows = ceil(T'/group).
struct Adaptor {
  ProjectionHead layer1;  // (group*d or d) -> hidden
  ProjectionHead layer2;  // hidden -> llm_dim
  bool average_groups = false;
  std::size_t group = 4;
};

Matrix adaptor_forward(const FrameEmbeddings &fe, const Adaptor &adaptor);

// Accumulates layer gradients for an upstream d loss / d output.
void adaptor_backward(const FrameEmbeddings &fe, const Adaptor &adaptor,
                      const Matrix &grad_output, AffineGrads *grad_layer1,
                      AffineGrads *grad_layer2);

void save_adaptor(const Adaptor &adaptor, const std::string &path);
Adaptor load_adaptor(const std::string &path);

}  // namespace voiceval

#endif  // VOICEVAL_MULTITASK_H_
