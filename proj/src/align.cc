// src/align.cc

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

#include "voiceval/align.h"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>

#include "voiceval/archive.h"
#include "voiceval/ops.h"
#include "voiceval/parallel.h"
#include "voiceval/rng.h"

namespace voiceval {

namespace {

constexpr double kLogTauMin = -6.907755278982137;  // ln 1e-3
constexpr double kLogTauMax = 4.605170185988092;   // ln 100

// d loss / d raw = (g - unit * (unit . g)) / norm for unit = raw / norm.
Vector normalize_backward(const Vector &unit, double raw_norm,
                          const Vector &g_unit) {
  double proj = 0.0;
  for (std::size_t k = 0; k < unit.dim(); ++k)
    proj += static_cast<double>(unit[k]) * static_cast<double>(g_unit[k]);
  Vector g(unit.dim());
  for (std::size_t k = 0; k < unit.dim(); ++k)
    g[k] = static_cast<float>(
        (static_cast<double>(g_unit[k]) -
         static_cast<double>(unit[k]) * proj) /
        raw_norm);
  return g;
}

}  // namespace

Vector project(const ProjectionHead &head, const Vector &x) {
  if (x.dim() != head.W.rows)
    throw std::invalid_argument("project: input dim mismatch");
  if (head.b.dim() != head.W.cols)
    throw std::invalid_argument("project: bias/weight shape mismatch");
  Vector out(head.W.cols);
  for (std::size_t c = 0; c < head.W.cols; ++c) {
    double acc = static_cast<double>(head.b[c]);
    for (std::size_t d = 0; d < x.dim(); ++d)
      acc += static_cast<double>(x[d]) * static_cast<double>(head.W.at(d, c));
    out[c] = static_cast<float>(acc);
  }
  return out;
}

double Temperature::tau() const {
  double t = std::exp(static_cast<double>(log_tau));
  return std::clamp(t, 1e-3, 100.0);
}

bool Temperature::clamped() const {
  double lt = static_cast<double>(log_tau);
  return lt <= kLogTauMin || lt >= kLogTauMax;
}

double symmetric_diagonal_ce(const std::vector<std::vector<double>> &logits) {
  std::size_t n = logits.size();
  if (n == 0) throw std::invalid_argument("symmetric_diagonal_ce: empty");
  for (const auto &row : logits)
    if (row.size() != n)
      throw std::invalid_argument("symmetric_diagonal_ce: not square");

  auto row_term = [](const std::vector<std::vector<double>> &m) {
    std::size_t size = m.size();
    double total = 0.0;
    for (std::size_t i = 0; i < size; ++i) {
      double max_logit = m[i][0];
      for (double x : m[i]) max_logit = std::max(max_logit, x);
      double sum = 0.0;
      for (double x : m[i]) sum += std::exp(x - max_logit);
      total += std::log(sum) + max_logit - m[i][i];
    }
    return total / static_cast<double>(size);
  };

  std::vector<std::vector<double>> transposed(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) transposed[j][i] = logits[i][j];
  double rows = row_term(logits);
  double cols = row_term(transposed);
  return 0.5 * (rows + cols);
}

double clap_loss(const PairedBatch &batch, const ProjectionHead &voice_head,
                 const ProjectionHead &text_head, const Temperature &temp,
                 ClapGrads *grads) {
  std::size_t n = batch.voice.size();
  if (n == 0) throw std::invalid_argument("clap_loss: empty batch");
  if (batch.text.size() != n)
    throw std::invalid_argument("clap_loss: voice/text count mismatch");

  double tau = temp.tau();

  std::vector<Vector> p_unit(n), q_unit(n);
  std::vector<double> p_norm(n), q_norm(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vector p = project(voice_head, batch.voice[i]);
    p_norm[i] = norm(p);
    if (p_norm[i] == 0.0)
      throw std::runtime_error("clap_loss: zero-norm voice projection");
    p_unit[i] = l2_normalize(p);
  }
  for (std::size_t j = 0; j < n; ++j) {
    Vector q = project(text_head, batch.text[j]);
    q_norm[j] = norm(q);
    if (q_norm[j] == 0.0)
      throw std::runtime_error("clap_loss: zero-norm text projection");
    q_unit[j] = l2_normalize(q);
  }

  std::vector<std::vector<double>> logits(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      logits[i][j] = dot(p_unit[i], q_unit[j]) / tau;

  double loss = symmetric_diagonal_ce(logits);
  if (grads == nullptr) return loss;

  // dL/dS_ij = (row_softmax - I)_ij / 2N + (col_softmax - I)_ij / 2N
  std::vector<std::vector<double>> g_s(n, std::vector<double>(n, 0.0));
  double inv_2n = 1.0 / (2.0 * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    double max_logit = logits[i][0];
    for (double x : logits[i]) max_logit = std::max(max_logit, x);
    double sum = 0.0;
    for (double x : logits[i]) sum += std::exp(x - max_logit);
    for (std::size_t j = 0; j < n; ++j) {
      double soft = std::exp(logits[i][j] - max_logit) / sum;
      g_s[i][j] += (soft - (i == j ? 1.0 : 0.0)) * inv_2n;
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    double max_logit = logits[0][j];
    for (std::size_t i = 0; i < n; ++i)
      max_logit = std::max(max_logit, logits[i][j]);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      sum += std::exp(logits[i][j] - max_logit);
    for (std::size_t i = 0; i < n; ++i) {
      double soft = std::exp(logits[i][j] - max_logit) / sum;
      g_s[i][j] += (soft - (i == j ? 1.0 : 0.0)) * inv_2n;
    }
  }

  std::size_t proj_dim = voice_head.W.cols;
  grads->voice_W = Matrix(voice_head.W.rows, voice_head.W.cols, 0.0f);
  grads->voice_b = Vector(voice_head.b.dim(), 0.0f);
  grads->text_W = Matrix(text_head.W.rows, text_head.W.cols, 0.0f);
  grads->text_b = Vector(text_head.b.dim(), 0.0f);
  grads->voice_in.assign(n, Vector(voice_head.W.rows, 0.0f));
  grads->text_in.assign(n, Vector(text_head.W.rows, 0.0f));

  // S_ij = (p_unit . q_unit) * exp(-log_tau), so dS/dlog_tau = -S.
  double g_log_tau = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g_log_tau -= g_s[i][j] * logits[i][j];
  grads->log_tau = temp.clamped() ? 0.0 : g_log_tau;

  for (std::size_t i = 0; i < n; ++i) {
    Vector g_unit(proj_dim, 0.0f);
    std::vector<double> acc(proj_dim, 0.0);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < proj_dim; ++k)
        acc[k] += g_s[i][j] * static_cast<double>(q_unit[j][k]) / tau;
    for (std::size_t k = 0; k < proj_dim; ++k)
      g_unit[k] = static_cast<float>(acc[k]);
    Vector g_raw = normalize_backward(p_unit[i], p_norm[i], g_unit);
    for (std::size_t k = 0; k < proj_dim; ++k) {
      grads->voice_b[k] += g_raw[k];
      for (std::size_t d = 0; d < voice_head.W.rows; ++d)
        grads->voice_W.at(d, k) += batch.voice[i][d] * g_raw[k];
    }
    for (std::size_t d = 0; d < voice_head.W.rows; ++d) {
      double acc_in = 0.0;
      for (std::size_t k = 0; k < proj_dim; ++k)
        acc_in += static_cast<double>(voice_head.W.at(d, k)) *
                  static_cast<double>(g_raw[k]);
      grads->voice_in[i][d] = static_cast<float>(acc_in);
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    Vector g_unit(proj_dim, 0.0f);
    std::vector<double> acc(proj_dim, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < proj_dim; ++k)
        acc[k] += g_s[i][j] * static_cast<double>(p_unit[i][k]) / tau;
    for (std::size_t k = 0; k < proj_dim; ++k)
      g_unit[k] = static_cast<float>(acc[k]);
    Vector g_raw = normalize_backward(q_unit[j], q_norm[j], g_unit);
    for (std::size_t k = 0; k < proj_dim; ++k) {
      grads->text_b[k] += g_raw[k];
      for (std::size_t d = 0; d < text_head.W.rows; ++d)
        grads->text_W.at(d, k) += batch.text[j][d] * g_raw[k];
    }
    for (std::size_t d = 0; d < text_head.W.rows; ++d) {
      double acc_in = 0.0;
      for (std::size_t k = 0; k < proj_dim; ++k)
        acc_in += static_cast<double>(text_head.W.at(d, k)) *
                  static_cast<double>(g_raw[k]);
      grads->text_in[j][d] = static_cast<float>(acc_in);
    }
  }
  return loss;
}

Vector toy_text_encode(const ToyTextEncoder &encoder,
                       const std::vector<std::string> &tokens) {
  if (tokens.empty())
    throw std::invalid_argument("toy_text_encode: empty token list");
  std::size_t dim = encoder.projection.W.rows;
  std::vector<double> acc(dim, 0.0);
  for (const std::string &tok : tokens) {
    auto it = encoder.vocab.find(tok);
    if (it == encoder.vocab.end())
      throw std::runtime_error("toy_text_encode: unknown token '" + tok + "'");
    if (it->second.dim() != dim)
      throw std::runtime_error("toy_text_encode: vocab dim mismatch");
    for (std::size_t d = 0; d < dim; ++d)
      acc[d] += static_cast<double>(it->second[d]);
  }
  Vector mean(dim);
  for (std::size_t d = 0; d < dim; ++d)
    mean[d] = static_cast<float>(acc[d] / static_cast<double>(tokens.size()));
  return l2_normalize(project(encoder.projection, mean));
}

Vector clap_project_voice(const ClapModel &model, const Vector &pooled) {
  return l2_normalize(project(model.voice_head, pooled));
}

namespace {

// Flat parameter layout for clap_train:
//   voice.W | voice.b | text.W | text.b | log_tau | vocab (token order)
struct ClapParamLayout {
  std::size_t voice_w = 0, voice_b = 0, text_w = 0, text_b = 0, log_tau = 0;
  std::size_t vocab_begin = 0;
  std::vector<std::string> tokens;
  std::size_t text_dim = 0;
  std::size_t total = 0;
};

}  // namespace

ClapTrainResult clap_train(const std::vector<Vector> &voice,
                           const std::vector<std::vector<std::string>> &captions,
                           const ClapTrainConfig &cfg) {
  if (voice.size() != captions.size())
    throw std::invalid_argument("clap_train: voice/caption count mismatch");
  if (voice.size() < 2)
    throw std::invalid_argument("clap_train: need at least 2 pairs");
  if (cfg.batch_size < 1)
    throw std::invalid_argument("clap_train: batch_size must be >= 1");
  std::size_t n = voice.size();
  std::size_t voice_dim = voice[0].dim();
  for (const Vector &v : voice)
    if (v.dim() != voice_dim)
      throw std::invalid_argument("clap_train: ragged voice dims");

  ClapTrainResult result;
  ClapModel &model = result.model;
  model.voice_head.W = Matrix(voice_dim, cfg.proj_dim, 0.0f);
  model.voice_head.b = Vector(cfg.proj_dim);
  model.text_encoder.projection.W = Matrix(cfg.text_dim, cfg.proj_dim, 0.0f);
  model.text_encoder.projection.b = Vector(cfg.proj_dim);
  model.temp = Temperature{};

  SplitMix64 init_rng = derive_stream(cfg.seed, 0xC1A9);
  for (std::size_t k = 0; k < cfg.proj_dim; ++k)
    model.voice_head.b[k] = init_rng.gaussian();
  model.voice_head.b = l2_normalize(model.voice_head.b);
  for (std::size_t k = 0; k < cfg.proj_dim; ++k)
    model.text_encoder.projection.b[k] = init_rng.gaussian();
  model.text_encoder.projection.b = l2_normalize(model.text_encoder.projection.b);

  for (const auto &caption : captions) {
    if (caption.empty())
      throw std::invalid_argument("clap_train: empty caption");
    for (const std::string &tok : caption)
      if (model.text_encoder.vocab.count(tok) == 0)
        model.text_encoder.vocab[tok] = Vector(cfg.text_dim);
  }
  float vocab_scale = 1.0f / std::sqrt(static_cast<float>(cfg.text_dim));
  for (auto &[tok, vec] : model.text_encoder.vocab)
    for (std::size_t d = 0; d < cfg.text_dim; ++d)
      vec[d] = vocab_scale * init_rng.gaussian();

  ClapParamLayout layout;
  layout.text_dim = cfg.text_dim;
  std::size_t cursor = 0;
  layout.voice_w = cursor;
  cursor += voice_dim * cfg.proj_dim;
  layout.voice_b = cursor;
  cursor += cfg.proj_dim;
  layout.text_w = cursor;
  cursor += cfg.text_dim * cfg.proj_dim;
  layout.text_b = cursor;
  cursor += cfg.proj_dim;
  layout.log_tau = cursor;
  cursor += 1;
  layout.vocab_begin = cursor;
  for (const auto &[tok, vec] : model.text_encoder.vocab) {
    layout.tokens.push_back(tok);
    cursor += cfg.text_dim;
  }
  layout.total = cursor;

  Vector params(layout.total, 0.0f);
  auto pack = [&]() {
    std::copy(model.voice_head.W.data.begin(), model.voice_head.W.data.end(),
              params.data.begin() + layout.voice_w);
    std::copy(model.voice_head.b.data.begin(), model.voice_head.b.data.end(),
              params.data.begin() + layout.voice_b);
    std::copy(model.text_encoder.projection.W.data.begin(),
              model.text_encoder.projection.W.data.end(),
              params.data.begin() + layout.text_w);
    std::copy(model.text_encoder.projection.b.data.begin(),
              model.text_encoder.projection.b.data.end(),
              params.data.begin() + layout.text_b);
    params[layout.log_tau] = model.temp.log_tau;
    std::size_t at = layout.vocab_begin;
    for (const std::string &tok : layout.tokens) {
      const Vector &vec = model.text_encoder.vocab.at(tok);
      std::copy(vec.data.begin(), vec.data.end(), params.data.begin() + at);
      at += cfg.text_dim;
    }
  };
  auto unpack = [&]() {
    std::copy(params.data.begin() + layout.voice_w,
              params.data.begin() + layout.voice_w +
                  model.voice_head.W.data.size(),
              model.voice_head.W.data.begin());
    std::copy(params.data.begin() + layout.voice_b,
              params.data.begin() + layout.voice_b + cfg.proj_dim,
              model.voice_head.b.data.begin());
    std::copy(params.data.begin() + layout.text_w,
              params.data.begin() + layout.text_w +
                  model.text_encoder.projection.W.data.size(),
              model.text_encoder.projection.W.data.begin());
    std::copy(params.data.begin() + layout.text_b,
              params.data.begin() + layout.text_b + cfg.proj_dim,
              model.text_encoder.projection.b.data.begin());
    model.temp.log_tau = params[layout.log_tau];
    std::size_t at = layout.vocab_begin;
    for (const std::string &tok : layout.tokens) {
      Vector &vec = model.text_encoder.vocab.at(tok);
      std::copy(params.data.begin() + at, params.data.begin() + at + cfg.text_dim,
                vec.data.begin());
      at += cfg.text_dim;
    }
  };
  pack();
  AdamState state(layout.total);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  auto text_mean = [&](std::size_t idx) {
    const auto &caption = captions[idx];
    std::vector<double> acc(cfg.text_dim, 0.0);
    for (const std::string &tok : caption) {
      const Vector &vec = model.text_encoder.vocab.at(tok);
      for (std::size_t d = 0; d < cfg.text_dim; ++d)
        acc[d] += static_cast<double>(vec[d]);
    }
    Vector mean(cfg.text_dim);
    for (std::size_t d = 0; d < cfg.text_dim; ++d)
      mean[d] =
          static_cast<float>(acc[d] / static_cast<double>(caption.size()));
    return mean;
  };

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    SplitMix64 rng = derive_stream(cfg.seed, 0xE000 + epoch);
    rng.shuffle(order);
    for (std::size_t begin = 0; begin < n; begin += cfg.batch_size) {
      std::size_t end = std::min(begin + cfg.batch_size, n);
      PairedBatch batch;
      for (std::size_t k = begin; k < end; ++k) {
        batch.voice.push_back(voice[order[k]]);
        batch.text.push_back(text_mean(order[k]));
      }
      ClapGrads grads;
      double loss = clap_loss(batch, model.voice_head,
                              model.text_encoder.projection, model.temp,
                              &grads);
      if (!std::isfinite(loss))
        throw std::runtime_error("clap_train: non-finite loss at step " +
                                 std::to_string(result.step_loss.size()));
      result.step_loss.push_back(loss);

      Vector flat(layout.total, 0.0f);
      std::copy(grads.voice_W.data.begin(), grads.voice_W.data.end(),
                flat.data.begin() + layout.voice_w);
      std::copy(grads.voice_b.data.begin(), grads.voice_b.data.end(),
                flat.data.begin() + layout.voice_b);
      std::copy(grads.text_W.data.begin(), grads.text_W.data.end(),
                flat.data.begin() + layout.text_w);
      std::copy(grads.text_b.data.begin(), grads.text_b.data.end(),
                flat.data.begin() + layout.text_b);
      flat[layout.log_tau] = static_cast<float>(grads.log_tau);
      // Mean-of-tokens backprop: each occurrence gets g_text / caption len.
      for (std::size_t k = begin; k < end; ++k) {
        std::size_t idx = order[k];
        const auto &caption = captions[idx];
        const Vector &g_text = grads.text_in[k - begin];
        float inv_len = 1.0f / static_cast<float>(caption.size());
        for (const std::string &tok : caption) {
          std::size_t slot =
              std::lower_bound(layout.tokens.begin(), layout.tokens.end(),
                               tok) -
              layout.tokens.begin();
          std::size_t at = layout.vocab_begin + slot * cfg.text_dim;
          for (std::size_t d = 0; d < cfg.text_dim; ++d)
            flat[at + d] += g_text[d] * inv_len;
        }
      }
      if (cfg.lr > 0.0f) {
        adam_step(params, flat, state, cfg.lr);
        unpack();
      }
    }
  }
  return result;
}

void save_clap_model(const ClapModel &model, const std::string &path) {
  TensorBundle bundle;
  bundle.tag = "clap";
  bundle.set_matrix("voice.W", model.voice_head.W);
  bundle.set_vector("voice.b", model.voice_head.b);
  bundle.set_matrix("text.W", model.text_encoder.projection.W);
  bundle.set_vector("text.b", model.text_encoder.projection.b);
  bundle.set_scalar("log_tau", model.temp.log_tau);
  for (const auto &[tok, vec] : model.text_encoder.vocab)
    bundle.set_vector("tok:" + tok, vec);
  write_bundle(bundle, path);
}

ClapModel load_clap_model(const std::string &path) {
  TensorBundle bundle = read_bundle(path);
  if (bundle.tag != "clap")
    throw std::runtime_error("not a clap checkpoint: " + path);
  ClapModel model;
  model.voice_head.W = bundle.get_matrix("voice.W");
  model.voice_head.b = bundle.get_vector("voice.b");
  model.text_encoder.projection.W = bundle.get_matrix("text.W");
  model.text_encoder.projection.b = bundle.get_vector("text.b");
  model.temp.log_tau = bundle.get_scalar("log_tau");
  for (const auto &[name, m] : bundle.tensors) {
    if (name.rfind("tok:", 0) != 0) continue;
    Vector v(m.cols);
    for (std::size_t i = 0; i < m.cols; ++i) v[i] = m.at(0, i);
    model.text_encoder.vocab[name.substr(4)] = std::move(v);
  }
  return model;
}

RetrievalResult retrieval_eval(const std::vector<Vector> &voice_emb,
                               const std::vector<Vector> &text_emb,
                               const RetrievalConfig &cfg) {
  std::size_t n = voice_emb.size();
  if (n == 0) throw std::invalid_argument("retrieval_eval: empty set");
  if (text_emb.size() != n)
    throw std::invalid_argument("retrieval_eval: unpaired sets");
  if (cfg.n_subsets < 1)
    throw std::invalid_argument("retrieval_eval: need >= 1 subset");

  RetrievalResult result;
  std::size_t m = cfg.subset_size;
  if (m > n) {
    std::cerr << "retrieval_eval: subset_size " << m << " clamped to "
              << n << "\n";
    m = n;
    result.subset_clamped = true;
  }
  if (m == 0) throw std::invalid_argument("retrieval_eval: empty subset");
  result.effective_subset_size = m;

  for (std::size_t k : cfg.ks) {
    result.speech_to_text[k] = 0.0;
    result.text_to_speech[k] = 0.0;
  }

  for (std::size_t subset = 0; subset < cfg.n_subsets; ++subset) {
    SplitMix64 rng = derive_stream(cfg.seed, 0x5EB5 + subset);
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    // Partial Fisher-Yates: the first m slots are a uniform sample.
    for (std::size_t i = 0; i < m; ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
      std::swap(pool[i], pool[j]);
    }
    std::vector<std::size_t> idx(pool.begin(), pool.begin() + m);
    std::sort(idx.begin(), idx.end());

    std::vector<std::vector<double>> sim(m, std::vector<double>(m));
    parallel_for(m, cfg.threads, [&](std::size_t r) {
      for (std::size_t c = 0; c < m; ++c)
        sim[r][c] = cosine(voice_emb[idx[r]], text_emb[idx[c]]);
    });

    for (std::size_t k : cfg.ks) {
      std::size_t hits_st = 0, hits_ts = 0;
      for (std::size_t r = 0; r < m; ++r) {
        std::size_t rank = 1;
        for (std::size_t c = 0; c < m; ++c) {
          if (c == r) continue;
          if (sim[r][c] > sim[r][r] || (sim[r][c] == sim[r][r] && c < r))
            ++rank;
        }
        if (rank <= k) ++hits_st;
      }
      for (std::size_t c = 0; c < m; ++c) {
        std::size_t rank = 1;
        for (std::size_t r = 0; r < m; ++r) {
          if (r == c) continue;
          if (sim[r][c] > sim[c][c] || (sim[r][c] == sim[c][c] && r < c))
            ++rank;
        }
        if (rank <= k) ++hits_ts;
      }
      result.speech_to_text[k] +=
          100.0 * static_cast<double>(hits_st) / static_cast<double>(m);
      result.text_to_speech[k] +=
          100.0 * static_cast<double>(hits_ts) / static_cast<double>(m);
    }
  }
  for (std::size_t k : cfg.ks) {
    result.speech_to_text[k] /= static_cast<double>(cfg.n_subsets);
    result.text_to_speech[k] /= static_cast<double>(cfg.n_subsets);
  }
  return result;
}

std::map<std::string, Vector> prompt_ensemble(const ToyTextEncoder &encoder,
                                              const TemplateSet &templates) {
  if (templates.empty())
    throw std::invalid_argument("prompt_ensemble: no templates");
  std::map<std::string, Vector> class_embeddings;
  for (const auto &[cls, lists] : templates) {
    if (lists.empty())
      throw std::invalid_argument("prompt_ensemble: class '" + cls +
                                  "' has no templates");
    std::size_t dim = encoder.projection.W.cols;
    std::vector<double> acc(dim, 0.0);
    for (const auto &tokens : lists) {
      Vector encoded = toy_text_encode(encoder, tokens);
      for (std::size_t d = 0; d < dim; ++d)
        acc[d] += static_cast<double>(encoded[d]);
    }
    Vector mean(dim);
    for (std::size_t d = 0; d < dim; ++d)
      mean[d] = static_cast<float>(acc[d] / static_cast<double>(lists.size()));
    class_embeddings[cls] = std::move(mean);
  }
  return class_embeddings;
}

std::size_t zsc_classify(const Vector &v,
                         const std::vector<Vector> &class_embeddings) {
  if (class_embeddings.empty())
    throw std::invalid_argument("zsc_classify: no classes");
  std::size_t best = 0;
  double best_score = cosine(v, class_embeddings[0]);
  for (std::size_t i = 1; i < class_embeddings.size(); ++i) {
    double score = cosine(v, class_embeddings[i]);
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return best;
}

}  // namespace voiceval
