// src/multitask.cc

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

#include "voiceval/multitask.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "voiceval/archive.h"
#include "voiceval/ops.h"
#include "voiceval/rng.h"

namespace voiceval {

namespace {

constexpr double kNormTolerance = 1e-2;

struct EncoderActivations {
  Matrix grouped;   // T2 x feat
  Matrix pre;       // T2 x hidden (before ReLU)
  Matrix hidden;    // T2 x hidden
  Matrix out;       // T2 x out_dim
};

EncoderActivations encoder_run(const Matrix &features, const ToyEncoder &enc) {
  if (enc.downsample < 1)
    throw std::invalid_argument("encoder: downsample must be >= 1");
  if (features.rows < 1)
    throw std::invalid_argument("encoder: need at least one frame");
  if (features.cols != enc.layer1.W.rows)
    throw std::invalid_argument("encoder: feature dim mismatch");
  if (enc.layer1.W.cols != enc.layer2.W.rows)
    throw std::invalid_argument("encoder: layer1/layer2 shape mismatch");

  std::size_t k = enc.downsample;
  std::size_t t2 = (features.rows + k - 1) / k;
  EncoderActivations act;
  act.grouped = Matrix(t2, features.cols);
  for (std::size_t g = 0; g < t2; ++g) {
    std::size_t begin = g * k;
    std::size_t end = std::min(begin + k, features.rows);
    for (std::size_t d = 0; d < features.cols; ++d) {
      double acc = 0.0;
      for (std::size_t t = begin; t < end; ++t)
        acc += static_cast<double>(features.at(t, d));
      act.grouped.at(g, d) =
          static_cast<float>(acc / static_cast<double>(end - begin));
    }
  }

  std::size_t hidden = enc.layer1.W.cols;
  std::size_t out_dim = enc.layer2.W.cols;
  act.pre = Matrix(t2, hidden);
  act.hidden = Matrix(t2, hidden);
  act.out = Matrix(t2, out_dim);
  for (std::size_t g = 0; g < t2; ++g) {
    for (std::size_t h = 0; h < hidden; ++h) {
      double acc = static_cast<double>(enc.layer1.b[h]);
      for (std::size_t d = 0; d < features.cols; ++d)
        acc += static_cast<double>(act.grouped.at(g, d)) *
               static_cast<double>(enc.layer1.W.at(d, h));
      float pre = static_cast<float>(acc);
      act.pre.at(g, h) = pre;
      act.hidden.at(g, h) = pre > 0.0f ? pre : 0.0f;
    }
    for (std::size_t o = 0; o < out_dim; ++o) {
      double acc = static_cast<double>(enc.layer2.b[o]);
      for (std::size_t h = 0; h < hidden; ++h)
        acc += static_cast<double>(act.hidden.at(g, h)) *
               static_cast<double>(enc.layer2.W.at(h, o));
      act.out.at(g, o) = static_cast<float>(acc);
    }
  }
  return act;
}

}  // namespace

FrameEmbeddings encoder_forward(const Matrix &features, const ToyEncoder &enc,
                                float input_frame_rate_hz,
                                const std::string &utt_id) {
  EncoderActivations act = encoder_run(features, enc);
  return make_frame_embeddings(
      utt_id, std::move(act.out),
      input_frame_rate_hz / static_cast<float>(enc.downsample));
}

std::vector<FrameEmbeddings> encode_archive(
    const std::vector<FrameEmbeddings> &archive, const ToyEncoder &enc) {
  std::vector<FrameEmbeddings> encoded;
  encoded.reserve(archive.size());
  for (const FrameEmbeddings &fe : archive)
    encoded.push_back(encoder_forward(valid_frames(fe), enc, fe.frame_rate_hz,
                                      fe.utt_id));
  return encoded;
}

double multitask_loss(const std::vector<MultitaskItem> &batch,
                      const ToyEncoder &enc, const TaskHeadSet &heads,
                      EncoderGrads *enc_grads,
                      std::map<Task, AffineGrads> *head_grads,
                      std::map<Task, double> *per_task_loss,
                      bool allow_missing) {
  if (batch.empty()) throw std::invalid_argument("multitask_loss: empty batch");
  bool any_positive = false;
  for (const auto &[task, weight] : heads.weights) {
    if (weight < 0.0f)
      throw std::invalid_argument("multitask_loss: negative task weight");
    if (weight > 0.0f) any_positive = true;
  }
  if (!any_positive)
    throw std::invalid_argument("multitask_loss: no positive task weight");

  std::vector<Task> active;
  for (const auto &[task, weight] : heads.weights) {
    if (weight <= 0.0f) continue;
    if (heads.heads.count(task) == 0)
      throw std::invalid_argument("multitask_loss: missing head for task " +
                                  task_name(task));
    active.push_back(task);
  }

  std::map<Task, std::size_t> counts;
  for (Task task : active) {
    std::size_t count = 0;
    for (const MultitaskItem &item : batch) {
      if (item.labels.count(task) > 0) {
        ++count;
      } else if (!allow_missing) {
        throw std::runtime_error(
            "multitask_loss: utterance lacks a label for active task " +
            task_name(task) + " and pseudo-labeling is disabled");
      }
    }
    counts[task] = count;
  }

  if (enc_grads != nullptr) {
    enc_grads->layer1.W = Matrix(enc.layer1.W.rows, enc.layer1.W.cols, 0.0f);
    enc_grads->layer1.b = Vector(enc.layer1.b.dim(), 0.0f);
    enc_grads->layer2.W = Matrix(enc.layer2.W.rows, enc.layer2.W.cols, 0.0f);
    enc_grads->layer2.b = Vector(enc.layer2.b.dim(), 0.0f);
  }
  if (head_grads != nullptr) {
    head_grads->clear();
    for (Task task : active) {
      const ProbeHead &head = heads.heads.at(task);
      AffineGrads g;
      g.W = Matrix(head.W.rows, head.W.cols, 0.0f);
      g.b = Vector(head.b.dim(), 0.0f);
      (*head_grads)[task] = std::move(g);
    }
  }
  std::map<Task, double> task_sums;
  for (Task task : active) task_sums[task] = 0.0;

  std::size_t out_dim = enc.layer2.W.cols;
  std::size_t hidden = enc.layer1.W.cols;

  for (const MultitaskItem &item : batch) {
    EncoderActivations act = encoder_run(item.features, enc);
    std::size_t t2 = act.out.rows;
    Vector pooled(out_dim);
    for (std::size_t o = 0; o < out_dim; ++o) {
      double acc = 0.0;
      for (std::size_t g = 0; g < t2; ++g)
        acc += static_cast<double>(act.out.at(g, o));
      pooled[o] = static_cast<float>(acc / static_cast<double>(t2));
    }

    std::vector<double> d_pooled(out_dim, 0.0);
    bool need_backprop = false;
    for (Task task : active) {
      auto label_it = item.labels.find(task);
      if (label_it == item.labels.end()) continue;
      const ProbeHead &head = heads.heads.at(task);
      if (head.W.rows != out_dim)
        throw std::invalid_argument("multitask_loss: head dim mismatch for " +
                                    task_name(task));
      Vector logits(head.W.cols);
      for (std::size_t c = 0; c < head.W.cols; ++c) {
        double acc = static_cast<double>(head.b[c]);
        for (std::size_t o = 0; o < out_dim; ++o)
          acc += static_cast<double>(pooled[o]) *
                 static_cast<double>(head.W.at(o, c));
        logits[c] = static_cast<float>(acc);
      }
      CrossEntropyResult ce = cross_entropy(logits, label_it->second);
      task_sums[task] += ce.loss;

      if (enc_grads == nullptr && head_grads == nullptr) continue;
      double coef = static_cast<double>(heads.weights.at(task)) /
                    static_cast<double>(counts.at(task));
      for (std::size_t c = 0; c < head.W.cols; ++c) {
        double g = static_cast<double>(ce.grad_logits[c]) * coef;
        if (head_grads != nullptr) {
          AffineGrads &hg = head_grads->at(task);
          hg.b[c] += static_cast<float>(g);
          for (std::size_t o = 0; o < out_dim; ++o)
            hg.W.at(o, c) += static_cast<float>(
                static_cast<double>(pooled[o]) * g);
        }
        if (enc_grads != nullptr) {
          for (std::size_t o = 0; o < out_dim; ++o)
            d_pooled[o] += static_cast<double>(head.W.at(o, c)) * g;
          need_backprop = true;
        }
      }
    }

    if (enc_grads == nullptr || !need_backprop) continue;

    // pooled = mean over rows of act.out, so every row gets d_pooled / T2.
    double inv_t2 = 1.0 / static_cast<double>(t2);
    std::vector<double> d_out(out_dim);
    for (std::size_t o = 0; o < out_dim; ++o) d_out[o] = d_pooled[o] * inv_t2;

    for (std::size_t g = 0; g < t2; ++g) {
      // layer2: out = hidden . W2 + b2
      for (std::size_t o = 0; o < out_dim; ++o) {
        float go = static_cast<float>(d_out[o]);
        enc_grads->layer2.b[o] += go;
        for (std::size_t h = 0; h < hidden; ++h)
          enc_grads->layer2.W.at(h, o) += act.hidden.at(g, h) * go;
      }
      // relu + layer1
      for (std::size_t h = 0; h < hidden; ++h) {
        if (act.pre.at(g, h) <= 0.0f) continue;
        double dh = 0.0;
        for (std::size_t o = 0; o < out_dim; ++o)
          dh += static_cast<double>(enc.layer2.W.at(h, o)) * d_out[o];
        float dhf = static_cast<float>(dh);
        enc_grads->layer1.b[h] += dhf;
        for (std::size_t d = 0; d < item.features.cols; ++d)
          enc_grads->layer1.W.at(d, h) += act.grouped.at(g, d) * dhf;
      }
    }
  }

  double loss = 0.0;
  for (Task task : active) {
    double mean = counts.at(task) > 0
                      ? task_sums.at(task) / static_cast<double>(counts.at(task))
                      : 0.0;
    if (per_task_loss != nullptr) (*per_task_loss)[task] = mean;
    loss += static_cast<double>(heads.weights.at(task)) * mean;
  }
  return loss;
}

std::optional<std::size_t> pseudo_label(const FrameEmbeddings &fe,
                                        const ProbeHead &head,
                                        const PseudoLabelPolicy &policy) {
  if (policy.confidence_threshold < 0.0 || policy.confidence_threshold > 1.0)
    throw std::invalid_argument("pseudo_label: threshold out of [0, 1]");
  Vector probs = softmax(probe_forward(fe, head));
  std::size_t best = 0;
  for (std::size_t c = 1; c < probs.dim(); ++c)
    if (probs[c] > probs[best]) best = c;
  if (static_cast<double>(probs[best]) >= policy.confidence_threshold)
    return best;
  return std::nullopt;
}

double margin_softmax_ce(const Vector &embedding, const Matrix &class_weights,
                         std::size_t label, float margin, float scale,
                         Vector *grad_embedding, Matrix *grad_weights) {
  std::size_t n_classes = class_weights.rows;
  std::size_t dim = class_weights.cols;
  if (embedding.dim() != dim)
    throw std::invalid_argument("margin_softmax_ce: dim mismatch");
  if (label >= n_classes)
    throw std::invalid_argument("margin_softmax_ce: label out of range");
  if (!(margin >= 0.0f && margin < 1.5707964f))
    throw std::invalid_argument("margin_softmax_ce: margin out of [0, pi/2)");
  if (!(scale > 0.0f))
    throw std::invalid_argument("margin_softmax_ce: scale must be > 0");
  if (std::abs(norm(embedding) - 1.0) > kNormTolerance)
    throw std::invalid_argument(
        "margin_softmax_ce: embedding is not L2-normalized");
  for (std::size_t c = 0; c < n_classes; ++c) {
    Vector row = matrix_row(class_weights, c);
    if (std::abs(norm(row) - 1.0) > kNormTolerance)
      throw std::invalid_argument(
          "margin_softmax_ce: class weight row is not L2-normalized");
  }

  double cos_m = std::cos(static_cast<double>(margin));
  double sin_m = std::sin(static_cast<double>(margin));

  std::vector<double> cos_theta(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) {
    double acc = 0.0;
    for (std::size_t d = 0; d < dim; ++d)
      acc += static_cast<double>(embedding[d]) *
             static_cast<double>(class_weights.at(c, d));
    cos_theta[c] = acc;
  }

  double c_lab = cos_theta[label];
  double sin_theta = std::sqrt(std::max(1.0 - c_lab * c_lab, 1e-12));
  Vector logits(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) {
    double logit = (c == label)
                       ? static_cast<double>(scale) *
                             (c_lab * cos_m - sin_theta * sin_m)
                       : static_cast<double>(scale) * cos_theta[c];
    logits[c] = static_cast<float>(logit);
  }
  CrossEntropyResult ce = cross_entropy(logits, label);

  if (grad_embedding != nullptr || grad_weights != nullptr) {
    for (std::size_t c = 0; c < n_classes; ++c) {
      // d logit / d cos: s for the others, s*(cos_m + cos*sin_m/sin) for the
      // margin class (from d[-sqrt(1-c^2)]/dc = c/sqrt(1-c^2)).
      double dlogit_dcos =
          (c == label)
              ? static_cast<double>(scale) *
                    (cos_m + c_lab * sin_m / sin_theta)
              : static_cast<double>(scale);
      double g = static_cast<double>(ce.grad_logits[c]) * dlogit_dcos;
      for (std::size_t d = 0; d < dim; ++d) {
        if (grad_embedding != nullptr)
          (*grad_embedding)[d] += static_cast<float>(
              g * static_cast<double>(class_weights.at(c, d)));
        if (grad_weights != nullptr)
          grad_weights->at(c, d) +=
              static_cast<float>(g * static_cast<double>(embedding[d]));
      }
    }
  }
  return ce.loss;
}

double ge2e_loss(const std::vector<std::vector<Vector>> &speaker_groups,
                 float w, float b,
                 std::vector<std::vector<Vector>> *grad_embeddings,
                 double *grad_w, double *grad_b) {
  std::size_t n_speakers = speaker_groups.size();
  if (n_speakers < 2)
    throw std::invalid_argument("ge2e_loss: need >= 2 speakers");
  if (!(w > 0.0f)) throw std::invalid_argument("ge2e_loss: w must be > 0");
  std::size_t dim = 0;
  std::size_t total_utts = 0;
  for (const auto &group : speaker_groups) {
    if (group.size() < 2)
      throw std::invalid_argument("ge2e_loss: singleton speaker group");
    for (const Vector &e : group) {
      if (dim == 0) dim = e.dim();
      if (e.dim() != dim)
        throw std::invalid_argument("ge2e_loss: ragged embedding dims");
      ++total_utts;
    }
  }

  // Per-speaker sums for O(1) centroid assembly.
  std::vector<std::vector<double>> sums(n_speakers,
                                        std::vector<double>(dim, 0.0));
  for (std::size_t s = 0; s < n_speakers; ++s)
    for (const Vector &e : speaker_groups[s])
      for (std::size_t d = 0; d < dim; ++d)
        sums[s][d] += static_cast<double>(e[d]);

  if (grad_embeddings != nullptr) {
    grad_embeddings->assign(n_speakers, {});
    for (std::size_t s = 0; s < n_speakers; ++s)
      (*grad_embeddings)[s].assign(speaker_groups[s].size(),
                                   Vector(dim, 0.0f));
  }
  if (grad_w != nullptr) *grad_w = 0.0;
  if (grad_b != nullptr) *grad_b = 0.0;

  double inv_m = 1.0 / static_cast<double>(total_utts);
  double loss = 0.0;

  for (std::size_t s = 0; s < n_speakers; ++s) {
    std::size_t n_s = speaker_groups[s].size();
    for (std::size_t u = 0; u < n_s; ++u) {
      const Vector &x = speaker_groups[s][u];
      std::vector<Vector> centroids(n_speakers);
      for (std::size_t k = 0; k < n_speakers; ++k) {
        std::size_t n_k = speaker_groups[k].size();
        Vector c(dim);
        if (k == s) {
          double denom = static_cast<double>(n_s - 1);
          for (std::size_t d = 0; d < dim; ++d)
            c[d] = static_cast<float>(
                (sums[s][d] - static_cast<double>(x[d])) / denom);
        } else {
          for (std::size_t d = 0; d < dim; ++d)
            c[d] = static_cast<float>(sums[k][d] /
                                      static_cast<double>(n_k));
        }
        centroids[k] = std::move(c);
      }

      std::vector<double> cos_k(n_speakers);
      Vector sims(n_speakers);
      for (std::size_t k = 0; k < n_speakers; ++k) {
        cos_k[k] = cosine(x, centroids[k]);
        sims[k] = static_cast<float>(static_cast<double>(w) * cos_k[k] +
                                     static_cast<double>(b));
      }
      CrossEntropyResult ce = cross_entropy(sims, s);
      loss += ce.loss * inv_m;

      if (grad_embeddings == nullptr && grad_w == nullptr && grad_b == nullptr)
        continue;

      double x_norm = norm(x);
      for (std::size_t k = 0; k < n_speakers; ++k) {
        double g_sim = static_cast<double>(ce.grad_logits[k]) * inv_m;
        if (grad_w != nullptr) *grad_w += g_sim * cos_k[k];
        if (grad_b != nullptr) *grad_b += g_sim;
        if (grad_embeddings == nullptr) continue;
        double g_cos = g_sim * static_cast<double>(w);

        const Vector &c = centroids[k];
        double c_norm = norm(c);
        // d cos(x, c)/dx = (c/|c| - cos * x/|x|) / |x|, symmetric in c.
        Vector &gx = (*grad_embeddings)[s][u];
        for (std::size_t d = 0; d < dim; ++d)
          gx[d] += static_cast<float>(
              g_cos *
              (static_cast<double>(c[d]) / c_norm -
               cos_k[k] * static_cast<double>(x[d]) / x_norm) /
              x_norm);

        std::vector<double> dc(dim);
        for (std::size_t d = 0; d < dim; ++d)
          dc[d] = g_cos *
                  (static_cast<double>(x[d]) / x_norm -
                   cos_k[k] * static_cast<double>(c[d]) / c_norm) /
                  c_norm;
        if (k == s) {
          double share = 1.0 / static_cast<double>(n_s - 1);
          for (std::size_t v = 0; v < n_s; ++v) {
            if (v == u) continue;
            Vector &gv = (*grad_embeddings)[s][v];
            for (std::size_t d = 0; d < dim; ++d)
              gv[d] += static_cast<float>(dc[d] * share);
          }
        } else {
          double share = 1.0 / static_cast<double>(speaker_groups[k].size());
          for (std::size_t v = 0; v < speaker_groups[k].size(); ++v) {
            Vector &gv = (*grad_embeddings)[k][v];
            for (std::size_t d = 0; d < dim; ++d)
              gv[d] += static_cast<float>(dc[d] * share);
          }
        }
      }
    }
  }
  return loss;
}

namespace {

std::map<Task, float> default_weights() {
  return {{Task::kSid, 1.0f},
          {Task::kAge, 1.0f},
          {Task::kGender, 1.0f},
          {Task::kEmotion, 1.0f}};
}

}  // namespace

MultitaskTrainResult multitask_train(
    const std::vector<FrameEmbeddings> &archive,
    const std::vector<UtteranceRecord> &manifest,
    const MultitaskTrainConfig &cfg) {
  if (archive.empty())
    throw std::invalid_argument("multitask_train: empty archive");
  std::map<Task, float> weights =
      cfg.task_weights.empty() ? default_weights() : cfg.task_weights;
  bool any_positive = false;
  for (const auto &[task, weight] : weights) any_positive |= weight > 0.0f;
  if (!any_positive)
    throw std::invalid_argument("multitask_train: no positive task weight");

  std::vector<Task> active;
  for (const auto &[task, weight] : weights)
    if (weight > 0.0f) active.push_back(task);

  std::unordered_map<std::string, const UtteranceRecord *> by_id;
  for (const UtteranceRecord &rec : manifest) by_id[rec.utt_id] = &rec;

  MultitaskTrainResult result;
  for (Task task : active)
    result.classes[task] = task_classes(manifest, task);

  struct TrainItem {
    MultitaskItem item;
    std::map<Task, std::size_t> true_labels;
    float frame_rate = 25.0f;
  };
  std::vector<TrainItem> items;
  for (const FrameEmbeddings &fe : archive) {
    auto it = by_id.find(fe.utt_id);
    if (it == by_id.end()) continue;
    TrainItem ti;
    ti.item.features = valid_frames(fe);
    ti.frame_rate = fe.frame_rate_hz;
    for (Task task : active) {
      std::optional<std::string> label = task_label(*it->second, task);
      if (!label) continue;
      const auto &classes = result.classes.at(task);
      auto ci = std::find(classes.begin(), classes.end(), *label);
      if (ci == classes.end())
        throw std::runtime_error("multitask_train: label '" + *label +
                                 "' missing from class list");
      ti.true_labels[task] =
          static_cast<std::size_t>(ci - classes.begin());
    }
    ti.item.labels = ti.true_labels;
    items.push_back(std::move(ti));
  }
  if (items.empty())
    throw std::runtime_error("multitask_train: no usable utterances");
  if (!cfg.pseudo_labels) {
    for (const TrainItem &ti : items)
      for (Task task : active)
        if (ti.true_labels.count(task) == 0)
          throw std::runtime_error(
              "multitask_train: utterance lacks a label for active task " +
              task_name(task) + " and pseudo-labeling is disabled");
  }

  std::size_t feat_dim = items[0].item.features.cols;
  std::size_t hidden = cfg.hidden;
  std::size_t out_dim = cfg.out_dim == 0 ? feat_dim : cfg.out_dim;

  ToyEncoder &enc = result.encoder;
  enc.downsample = cfg.downsample;
  enc.layer1.W = Matrix(feat_dim, hidden);
  enc.layer1.b = Vector(hidden, 0.0f);
  enc.layer2.W = Matrix(hidden, out_dim);
  enc.layer2.b = Vector(out_dim, 0.0f);
  SplitMix64 init_rng = derive_stream(cfg.seed, 0xE4C0);
  auto glorot = [&](Matrix &m) {
    double limit = std::sqrt(6.0 / static_cast<double>(m.rows + m.cols));
    for (float &x : m.data)
      x = static_cast<float>(init_rng.uniform_range(-limit, limit));
  };
  glorot(enc.layer1.W);
  glorot(enc.layer2.W);

  TaskHeadSet &heads = result.heads;
  heads.weights = weights;
  for (Task task : active) {
    ProbeHead head;
    head.task = task_name(task);
    head.W = Matrix(out_dim, result.classes.at(task).size(), 0.0f);
    head.b = Vector(result.classes.at(task).size(), 0.0f);
    heads.heads[task] = std::move(head);
  }

  // Flat parameter vector: encoder layers then heads in task order.
  std::vector<float *> slots;
  std::vector<std::size_t> sizes;
  auto add_tensor = [&](std::vector<float> &data) {
    slots.push_back(data.data());
    sizes.push_back(data.size());
  };
  add_tensor(enc.layer1.W.data);
  add_tensor(enc.layer1.b.data);
  add_tensor(enc.layer2.W.data);
  add_tensor(enc.layer2.b.data);
  for (Task task : active) {
    add_tensor(heads.heads.at(task).W.data);
    add_tensor(heads.heads.at(task).b.data);
  }
  std::size_t total = 0;
  for (std::size_t n : sizes) total += n;

  Vector params(total);
  AdamState state(total);
  auto pack = [&]() {
    std::size_t at = 0;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      std::copy(slots[i], slots[i] + sizes[i], params.data.begin() + at);
      at += sizes[i];
    }
  };
  auto unpack = [&]() {
    std::size_t at = 0;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      std::copy(params.data.begin() + at, params.data.begin() + at + sizes[i],
                slots[i]);
      at += sizes[i];
    }
  };
  pack();

  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t step = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.pseudo_labels &&
        (epoch % std::max<std::size_t>(1, cfg.pseudo_policy.refresh_every_epochs)) == 0) {
      for (TrainItem &ti : items) {
        ti.item.labels = ti.true_labels;
        for (Task task : active) {
          if (ti.true_labels.count(task) > 0) continue;
          FrameEmbeddings fe = encoder_forward(ti.item.features, enc,
                                               ti.frame_rate);
          std::optional<std::size_t> guess =
              pseudo_label(fe, heads.heads.at(task), cfg.pseudo_policy);
          if (guess) ti.item.labels[task] = *guess;
        }
      }
    }

    SplitMix64 rng = derive_stream(cfg.seed, 0xB000 + epoch);
    rng.shuffle(order);
    for (std::size_t begin = 0; begin < order.size();
         begin += cfg.batch_size) {
      std::size_t end = std::min(begin + cfg.batch_size, order.size());
      std::vector<MultitaskItem> batch;
      batch.reserve(end - begin);
      for (std::size_t k = begin; k < end; ++k)
        batch.push_back(items[order[k]].item);

      EncoderGrads enc_grads;
      std::map<Task, AffineGrads> head_grads;
      std::map<Task, double> per_task;
      double loss = multitask_loss(batch, enc, heads, &enc_grads, &head_grads,
                                   &per_task, cfg.pseudo_labels);
      if (!std::isfinite(loss))
        throw std::runtime_error(
            "multitask_train: non-finite loss at step " +
            std::to_string(step) + " (diverged)");

      Vector grads(total, 0.0f);
      std::size_t at = 0;
      auto emit = [&](const std::vector<float> &data) {
        std::copy(data.begin(), data.end(), grads.data.begin() + at);
        at += data.size();
      };
      emit(enc_grads.layer1.W.data);
      emit(enc_grads.layer1.b.data);
      emit(enc_grads.layer2.W.data);
      emit(enc_grads.layer2.b.data);
      for (Task task : active) {
        emit(head_grads.at(task).W.data);
        emit(head_grads.at(task).b.data);
      }
      if (cfg.lr > 0.0f) {
        adam_step(params, grads, state, cfg.lr);
        unpack();
      }

      TraceRow row;
      row.step = step++;
      row.loss = loss;
      row.per_task = per_task;
      result.trace.push_back(std::move(row));
    }
  }
  return result;
}

void save_encoder(const ToyEncoder &enc, const std::string &path) {
  TensorBundle bundle;
  bundle.tag = "encoder";
  bundle.set_matrix("layer1.W", enc.layer1.W);
  bundle.set_vector("layer1.b", enc.layer1.b);
  bundle.set_matrix("layer2.W", enc.layer2.W);
  bundle.set_vector("layer2.b", enc.layer2.b);
  bundle.set_scalar("downsample", static_cast<float>(enc.downsample));
  write_bundle(bundle, path);
}

ToyEncoder load_encoder(const std::string &path) {
  TensorBundle bundle = read_bundle(path);
  if (bundle.tag != "encoder")
    throw std::runtime_error("not an encoder checkpoint: " + path);
  ToyEncoder enc;
  enc.layer1.W = bundle.get_matrix("layer1.W");
  enc.layer1.b = bundle.get_vector("layer1.b");
  enc.layer2.W = bundle.get_matrix("layer2.W");
  enc.layer2.b = bundle.get_vector("layer2.b");
  enc.downsample = static_cast<std::size_t>(bundle.get_scalar("downsample"));
  return enc;
}

void save_task_heads(const MultitaskTrainResult &result,
                     const std::string &path) {
  TensorBundle bundle;
  std::ostringstream tag;
  tag << "taskheads";
  for (const auto &[task, classes] : result.classes) {
    tag << ":" << task_name(task) << "=";
    for (std::size_t i = 0; i < classes.size(); ++i) {
      if (i > 0) tag << ",";
      tag << classes[i];
    }
  }
  bundle.tag = tag.str();
  for (const auto &[task, head] : result.heads.heads) {
    bundle.set_matrix(task_name(task) + ".W", head.W);
    bundle.set_vector(task_name(task) + ".b", head.b);
    bundle.set_scalar(task_name(task) + ".lambda",
                      result.heads.weights.at(task));
  }
  write_bundle(bundle, path);
}

Matrix adaptor_forward(const FrameEmbeddings &fe, const Adaptor &adaptor) {
  if (adaptor.group < 1)
    throw std::invalid_argument("adaptor_forward: group must be >= 1");
  Matrix frames = valid_frames(fe);
  if (frames.rows < 1)
    throw std::invalid_argument("adaptor_forward: no valid frames");
  std::size_t d = frames.cols;
  std::size_t in_dim = adaptor.average_groups ? d : adaptor.group * d;
  if (adaptor.layer1.W.rows != in_dim)
    throw std::invalid_argument("adaptor_forward: layer1 dim mismatch");
  if (adaptor.layer1.W.cols != adaptor.layer2.W.rows)
    throw std::invalid_argument("adaptor_forward: layer1/layer2 mismatch");

  std::size_t n_groups = (frames.rows + adaptor.group - 1) / adaptor.group;
  std::size_t hidden = adaptor.layer1.W.cols;
  std::size_t out_dim = adaptor.layer2.W.cols;
  Matrix out(n_groups, out_dim);

  Vector stacked(in_dim);
  for (std::size_t g = 0; g < n_groups; ++g) {
    std::size_t begin = g * adaptor.group;
    std::size_t end = std::min(begin + adaptor.group, frames.rows);
    if (adaptor.average_groups) {
      for (std::size_t k = 0; k < d; ++k) {
        double acc = 0.0;
        for (std::size_t t = begin; t < end; ++t)
          acc += static_cast<double>(frames.at(t, k));
        stacked[k] = static_cast<float>(acc / static_cast<double>(end - begin));
      }
    } else {
      // Zero-pad the trailing partial group.
      std::fill(stacked.data.begin(), stacked.data.end(), 0.0f);
      for (std::size_t t = begin; t < end; ++t)
        for (std::size_t k = 0; k < d; ++k)
          stacked[(t - begin) * d + k] = frames.at(t, k);
    }
    Vector h(hidden);
    for (std::size_t j = 0; j < hidden; ++j) {
      double acc = static_cast<double>(adaptor.layer1.b[j]);
      for (std::size_t i = 0; i < in_dim; ++i)
        acc += static_cast<double>(stacked[i]) *
               static_cast<double>(adaptor.layer1.W.at(i, j));
      float pre = static_cast<float>(acc);
      h[j] = pre > 0.0f ? pre : 0.0f;
    }
    for (std::size_t o = 0; o < out_dim; ++o) {
      double acc = static_cast<double>(adaptor.layer2.b[o]);
      for (std::size_t j = 0; j < hidden; ++j)
        acc += static_cast<double>(h[j]) *
               static_cast<double>(adaptor.layer2.W.at(j, o));
      out.at(g, o) = static_cast<float>(acc);
    }
  }
  return out;
}

void adaptor_backward(const FrameEmbeddings &fe, const Adaptor &adaptor,
                      const Matrix &grad_output, AffineGrads *grad_layer1,
                      AffineGrads *grad_layer2) {
  Matrix frames = valid_frames(fe);
  std::size_t d = frames.cols;
  std::size_t in_dim = adaptor.average_groups ? d : adaptor.group * d;
  std::size_t n_groups = (frames.rows + adaptor.group - 1) / adaptor.group;
  std::size_t hidden = adaptor.layer1.W.cols;
  std::size_t out_dim = adaptor.layer2.W.cols;
  if (grad_output.rows != n_groups || grad_output.cols != out_dim)
    throw std::invalid_argument("adaptor_backward: grad shape mismatch");

  if (grad_layer1 != nullptr &&
      (grad_layer1->W.rows != in_dim || grad_layer1->W.cols != hidden)) {
    grad_layer1->W = Matrix(in_dim, hidden, 0.0f);
    grad_layer1->b = Vector(hidden, 0.0f);
  }
  if (grad_layer2 != nullptr &&
      (grad_layer2->W.rows != hidden || grad_layer2->W.cols != out_dim)) {
    grad_layer2->W = Matrix(hidden, out_dim, 0.0f);
    grad_layer2->b = Vector(out_dim, 0.0f);
  }

  Vector stacked(in_dim);
  for (std::size_t g = 0; g < n_groups; ++g) {
    std::size_t begin = g * adaptor.group;
    std::size_t end = std::min(begin + adaptor.group, frames.rows);
    if (adaptor.average_groups) {
      for (std::size_t k = 0; k < d; ++k) {
        double acc = 0.0;
        for (std::size_t t = begin; t < end; ++t)
          acc += static_cast<double>(frames.at(t, k));
        stacked[k] = static_cast<float>(acc / static_cast<double>(end - begin));
      }
    } else {
      std::fill(stacked.data.begin(), stacked.data.end(), 0.0f);
      for (std::size_t t = begin; t < end; ++t)
        for (std::size_t k = 0; k < d; ++k)
          stacked[(t - begin) * d + k] = frames.at(t, k);
    }
    std::vector<double> pre(hidden);
    Vector h(hidden);
    for (std::size_t j = 0; j < hidden; ++j) {
      double acc = static_cast<double>(adaptor.layer1.b[j]);
      for (std::size_t i = 0; i < in_dim; ++i)
        acc += static_cast<double>(stacked[i]) *
               static_cast<double>(adaptor.layer1.W.at(i, j));
      pre[j] = acc;
      float pf = static_cast<float>(acc);
      h[j] = pf > 0.0f ? pf : 0.0f;
    }
    for (std::size_t o = 0; o < out_dim; ++o) {
      float go = grad_output.at(g, o);
      if (grad_layer2 != nullptr) {
        grad_layer2->b[o] += go;
        for (std::size_t j = 0; j < hidden; ++j)
          grad_layer2->W.at(j, o) += h[j] * go;
      }
    }
    if (grad_layer1 != nullptr) {
      for (std::size_t j = 0; j < hidden; ++j) {
        if (!(static_cast<float>(pre[j]) > 0.0f)) continue;
        double dh = 0.0;
        for (std::size_t o = 0; o < out_dim; ++o)
          dh += static_cast<double>(adaptor.layer2.W.at(j, o)) *
                static_cast<double>(grad_output.at(g, o));
        float dhf = static_cast<float>(dh);
        grad_layer1->b[j] += dhf;
        for (std::size_t i = 0; i < in_dim; ++i)
          grad_layer1->W.at(i, j) += stacked[i] * dhf;
      }
    }
  }
}

void save_adaptor(const Adaptor &adaptor, const std::string &path) {
  TensorBundle bundle;
  bundle.tag = "adaptor";
  bundle.set_matrix("layer1.W", adaptor.layer1.W);
  bundle.set_vector("layer1.b", adaptor.layer1.b);
  bundle.set_matrix("layer2.W", adaptor.layer2.W);
  bundle.set_vector("layer2.b", adaptor.layer2.b);
  bundle.set_scalar("average", adaptor.average_groups ? 1.0f : 0.0f);
  bundle.set_scalar("group", static_cast<float>(adaptor.group));
  write_bundle(bundle, path);
}

Adaptor load_adaptor(const std::string &path) {
  TensorBundle bundle = read_bundle(path);
  if (bundle.tag != "adaptor")
    throw std::runtime_error("not an adaptor checkpoint: " + path);
  Adaptor adaptor;
  adaptor.layer1.W = bundle.get_matrix("layer1.W");
  adaptor.layer1.b = bundle.get_vector("layer1.b");
  adaptor.layer2.W = bundle.get_matrix("layer2.W");
  adaptor.layer2.b = bundle.get_vector("layer2.b");
  adaptor.average_groups = bundle.get_scalar("average") != 0.0f;
  adaptor.group = static_cast<std::size_t>(bundle.get_scalar("group"));
  return adaptor;
}

}  // namespace voiceval
