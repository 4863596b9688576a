// src/probe.cc

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

#include "voiceval/probe.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "voiceval/archive.h"
#include "voiceval/ops.h"
#include "voiceval/parallel.h"
#include "voiceval/rng.h"

namespace voiceval {

Vector probe_forward(const FrameEmbeddings &fe, const ProbeHead &head) {
  if (fe.dim() != head.W.rows)
    throw std::invalid_argument("probe_forward: dim mismatch");
  if (head.b.dim() != head.W.cols)
    throw std::invalid_argument("probe_forward: bias/weight shape mismatch");
  std::size_t n_classes = head.W.cols;
  std::size_t count = fe.num_valid();
  if (count == 0)
    throw std::invalid_argument("probe_forward: no valid frames");

  std::vector<double> acc(n_classes, 0.0);
  for (std::size_t t = 0; t < fe.num_frames(); ++t) {
    if (!fe.valid[t]) continue;
    const float *frame = fe.frames.row(t);
    for (std::size_t c = 0; c < n_classes; ++c) {
      double logit = static_cast<double>(head.b[c]);
      for (std::size_t d = 0; d < fe.dim(); ++d)
        logit += static_cast<double>(frame[d]) *
                 static_cast<double>(head.W.at(d, c));
      acc[c] += logit;
    }
  }
  Vector logits(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c)
    logits[c] = static_cast<float>(acc[c] / static_cast<double>(count));
  return logits;
}

double probe_batch_loss(const std::vector<Vector> &pooled,
                        const std::vector<std::size_t> &labels,
                        const Matrix &W, const Vector &b, Matrix *grad_W,
                        Vector *grad_b) {
  if (pooled.size() != labels.size() || pooled.empty())
    throw std::invalid_argument("probe_batch_loss: bad batch");
  std::size_t n_classes = W.cols;
  double inv_n = 1.0 / static_cast<double>(pooled.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    const Vector &x = pooled[i];
    if (x.dim() != W.rows)
      throw std::invalid_argument("probe_batch_loss: dim mismatch");
    Vector logits(n_classes);
    for (std::size_t c = 0; c < n_classes; ++c) {
      double acc = static_cast<double>(b[c]);
      for (std::size_t d = 0; d < x.dim(); ++d)
        acc += static_cast<double>(x[d]) * static_cast<double>(W.at(d, c));
      logits[c] = static_cast<float>(acc);
    }
    CrossEntropyResult ce = cross_entropy(logits, labels[i]);
    loss += ce.loss * inv_n;
    if (grad_W != nullptr || grad_b != nullptr) {
      for (std::size_t c = 0; c < n_classes; ++c) {
        float g = static_cast<float>(static_cast<double>(ce.grad_logits[c]) *
                                     inv_n);
        if (grad_b != nullptr) (*grad_b)[c] += g;
        if (grad_W != nullptr)
          for (std::size_t d = 0; d < x.dim(); ++d)
            grad_W->at(d, c) += x[d] * g;
      }
    }
  }
  return loss;
}

namespace {

struct LabeledSet {
  std::vector<Vector> pooled;
  std::vector<std::size_t> labels;
};

LabeledSet collect_labeled(const std::vector<FrameEmbeddings> &archive,
                           const std::vector<UtteranceRecord> &manifest,
                           Task task, const std::vector<std::string> &classes) {
  std::unordered_map<std::string, std::size_t> class_index;
  for (std::size_t i = 0; i < classes.size(); ++i) class_index[classes[i]] = i;
  std::unordered_map<std::string, const UtteranceRecord *> by_id;
  for (const UtteranceRecord &rec : manifest) by_id[rec.utt_id] = &rec;

  LabeledSet set;
  for (const FrameEmbeddings &fe : archive) {
    auto it = by_id.find(fe.utt_id);
    if (it == by_id.end()) continue;
    std::optional<std::string> label = task_label(*it->second, task);
    if (!label) continue;
    auto ci = class_index.find(*label);
    if (ci == class_index.end())
      throw std::runtime_error("probe: label '" + *label +
                               "' not in class list");
    set.pooled.push_back(mean_pool(fe));
    set.labels.push_back(ci->second);
  }
  return set;
}

}  // namespace

ProbeTrainResult probe_train(const std::vector<FrameEmbeddings> &archive,
                             const std::vector<UtteranceRecord> &manifest,
                             Task task, const ProbeTrainConfig &cfg) {
  std::vector<std::string> classes = task_classes(manifest, task);
  LabeledSet set = collect_labeled(archive, manifest, task, classes);
  if (set.pooled.empty())
    throw std::runtime_error("probe_train: no labeled utterances for task " +
                             task_name(task));
  std::size_t dim = set.pooled[0].dim();
  std::size_t n_classes = classes.size();

  ProbeTrainResult result;
  result.classes = classes;
  result.head.task = task_name(task);
  result.head.W = Matrix(dim, n_classes, 0.0f);
  result.head.b = Vector(n_classes, 0.0f);

  Vector params(dim * n_classes + n_classes, 0.0f);
  AdamState state(params.dim());
  std::vector<std::size_t> order(set.pooled.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    SplitMix64 rng = derive_stream(cfg.seed, epoch);
    rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t begin = 0; begin < order.size();
         begin += cfg.batch_size) {
      std::size_t end = std::min(begin + cfg.batch_size, order.size());
      std::vector<Vector> batch;
      std::vector<std::size_t> labels;
      for (std::size_t k = begin; k < end; ++k) {
        batch.push_back(set.pooled[order[k]]);
        labels.push_back(set.labels[order[k]]);
      }
      Matrix grad_W(dim, n_classes, 0.0f);
      Vector grad_b(n_classes, 0.0f);
      epoch_loss += probe_batch_loss(batch, labels, result.head.W,
                                     result.head.b, &grad_W, &grad_b);
      ++n_batches;

      if (cfg.lr > 0.0f) {
        Vector grads(params.dim());
        std::copy(grad_W.data.begin(), grad_W.data.end(), grads.data.begin());
        std::copy(grad_b.data.begin(), grad_b.data.end(),
                  grads.data.begin() +
                      static_cast<std::ptrdiff_t>(dim * n_classes));
        std::copy(result.head.W.data.begin(), result.head.W.data.end(),
                  params.data.begin());
        std::copy(result.head.b.data.begin(), result.head.b.data.end(),
                  params.data.begin() +
                      static_cast<std::ptrdiff_t>(dim * n_classes));
        adam_step(params, grads, state, cfg.lr);
        std::copy(params.data.begin(),
                  params.data.begin() +
                      static_cast<std::ptrdiff_t>(dim * n_classes),
                  result.head.W.data.begin());
        std::copy(params.data.begin() +
                      static_cast<std::ptrdiff_t>(dim * n_classes),
                  params.data.end(), result.head.b.data.begin());
      }
    }
    result.epoch_loss.push_back(n_batches > 0 ? epoch_loss / n_batches : 0.0);
  }
  return result;
}

double probe_eval(const std::vector<FrameEmbeddings> &archive,
                  const std::vector<UtteranceRecord> &manifest,
                  const ProbeHead &head, const std::vector<std::string> &classes,
                  int threads) {
  Task task = parse_task(head.task);
  std::unordered_map<std::string, std::size_t> class_index;
  for (std::size_t i = 0; i < classes.size(); ++i) class_index[classes[i]] = i;
  std::unordered_map<std::string, const UtteranceRecord *> by_id;
  for (const UtteranceRecord &rec : manifest) by_id[rec.utt_id] = &rec;

  std::vector<const FrameEmbeddings *> eval_set;
  std::vector<std::size_t> labels;
  for (const FrameEmbeddings &fe : archive) {
    auto it = by_id.find(fe.utt_id);
    if (it == by_id.end()) continue;
    std::optional<std::string> label = task_label(*it->second, task);
    if (!label) continue;
    auto ci = class_index.find(*label);
    if (ci == class_index.end())
      throw std::runtime_error("probe_eval: label '" + *label +
                               "' not in class list");
    eval_set.push_back(&fe);
    labels.push_back(ci->second);
  }
  if (eval_set.empty())
    throw std::runtime_error("probe_eval: empty eval set");

  std::vector<std::uint8_t> correct(eval_set.size(), 0);
  parallel_for(eval_set.size(), threads, [&](std::size_t i) {
    Vector logits = probe_forward(*eval_set[i], head);
    std::size_t best = 0;
    for (std::size_t c = 1; c < logits.dim(); ++c)
      if (logits[c] > logits[best]) best = c;
    correct[i] = (best == labels[i]) ? 1 : 0;
  });
  std::size_t n_correct = 0;
  for (std::uint8_t c : correct) n_correct += c;
  return 100.0 * static_cast<double>(n_correct) /
         static_cast<double>(eval_set.size());
}

void save_probe_head(const ProbeHead &head,
                     const std::vector<std::string> &classes,
                     const std::string &path) {
  TensorBundle bundle;
  std::ostringstream tag;
  tag << "probe:" << head.task << ":";
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (i > 0) tag << ",";
    tag << classes[i];
  }
  bundle.tag = tag.str();
  bundle.set_matrix("W", head.W);
  bundle.set_vector("b", head.b);
  write_bundle(bundle, path);
}

LoadedProbeHead load_probe_head(const std::string &path) {
  TensorBundle bundle = read_bundle(path);
  if (bundle.tag.rfind("probe:", 0) != 0)
    throw std::runtime_error("not a probe head checkpoint: " + path);
  std::string rest = bundle.tag.substr(6);
  std::size_t colon = rest.find(':');
  if (colon == std::string::npos)
    throw std::runtime_error("malformed probe head tag in " + path);
  LoadedProbeHead loaded;
  loaded.head.task = rest.substr(0, colon);
  std::string class_list = rest.substr(colon + 1);
  std::istringstream ss(class_list);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) loaded.classes.push_back(item);
  loaded.head.W = bundle.get_matrix("W");
  loaded.head.b = bundle.get_vector("b");
  return loaded;
}

}  // namespace voiceval
