// src/ops.cc

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

#include "voiceval/ops.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace voiceval {

bool all_finite(const Vector &v) {
  for (float x : v.data) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

bool all_finite(const Matrix &m) {
  for (float x : m.data) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

Vector matrix_row(const Matrix &m, std::size_t r) {
  Vector out(m.cols);
  const float *src = m.row(r);
  for (std::size_t c = 0; c < m.cols; ++c) out[c] = src[c];
  return out;
}

double dot(const Vector &a, const Vector &b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("dot: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i)
    acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return acc;
}

double squared_norm(const Vector &v) {
  double acc = 0.0;
  for (float x : v.data) acc += static_cast<double>(x) * static_cast<double>(x);
  return acc;
}

double norm(const Vector &v) { return std::sqrt(squared_norm(v)); }

Vector softmax(const Vector &logits) {
  if (logits.dim() == 0) throw std::invalid_argument("softmax: empty vector");
  float max_logit = logits[0];
  for (float x : logits.data) max_logit = std::max(max_logit, x);
  Vector out(logits.dim());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.dim(); ++i) {
    out[i] = std::exp(logits[i] - max_logit);
    sum += static_cast<double>(out[i]);
  }
  for (std::size_t i = 0; i < out.dim(); ++i)
    out[i] = static_cast<float>(static_cast<double>(out[i]) / sum);
  return out;
}

CrossEntropyResult cross_entropy(const Vector &logits, std::size_t label) {
  if (label >= logits.dim())
    throw std::invalid_argument("cross_entropy: label out of range");
  float max_logit = logits[0];
  for (float x : logits.data) max_logit = std::max(max_logit, x);
  double sum = 0.0;
  for (float x : logits.data)
    sum += std::exp(static_cast<double>(x) - static_cast<double>(max_logit));
  double log_z = std::log(sum) + static_cast<double>(max_logit);

  CrossEntropyResult result;
  result.loss = log_z - static_cast<double>(logits[label]);
  result.grad_logits = softmax(logits);
  result.grad_logits[label] -= 1.0f;
  return result;
}

double cosine(const Vector &a, const Vector &b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("cosine: dimension mismatch");
  double na = norm(a);
  double nb = norm(b);
  if (na == 0.0 || nb == 0.0)
    throw std::invalid_argument("cosine: zero-norm input");
  double c = dot(a, b) / (na * nb);
  return std::clamp(c, -1.0, 1.0);
}

Vector l2_normalize(const Vector &v) {
  double n = norm(v);
  if (n == 0.0) throw std::invalid_argument("l2_normalize: zero vector");
  Vector out(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i)
    out[i] = static_cast<float>(static_cast<double>(v[i]) / n);
  return out;
}

void adam_step(Vector &params, const Vector &grads, AdamState &state,
               float lr) {
  if (params.dim() != grads.dim() ||
      params.dim() != state.first_moment.dim() ||
      params.dim() != state.second_moment.dim())
    throw std::invalid_argument("adam_step: shape mismatch");
  if (!(lr > 0.0f)) throw std::invalid_argument("adam_step: lr must be > 0");

  state.step += 1;
  double b1 = static_cast<double>(state.beta1);
  double b2 = static_cast<double>(state.beta2);
  double bias1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  double bias2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.dim(); ++i) {
    float g = grads[i];
    float m = state.beta1 * state.first_moment[i] + (1.0f - state.beta1) * g;
    float v =
        state.beta2 * state.second_moment[i] + (1.0f - state.beta2) * g * g;
    state.first_moment[i] = m;
    state.second_moment[i] = v;
    double m_hat = static_cast<double>(m) / bias1;
    double v_hat = static_cast<double>(v) / bias2;
    params[i] = static_cast<float>(
        static_cast<double>(params[i]) -
        static_cast<double>(lr) * m_hat /
            (std::sqrt(v_hat) + static_cast<double>(state.eps)));
  }
}

Vector finite_diff_grad(const std::function<double(const Vector &)> &f,
                        const Vector &x, double eps) {
  if (!(eps > 0.0))
    throw std::invalid_argument("finite_diff_grad: eps must be > 0");
  Vector grad(x.dim());
  Vector probe = x;
  for (std::size_t i = 0; i < x.dim(); ++i) {
    float saved = probe[i];
    probe[i] = static_cast<float>(static_cast<double>(saved) + eps);
    double x_up = static_cast<double>(probe[i]);
    double up = f(probe);
    probe[i] = static_cast<float>(static_cast<double>(saved) - eps);
    double x_down = static_cast<double>(probe[i]);
    double down = f(probe);
    probe[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down))
      throw std::runtime_error("finite_diff_grad: non-finite f evaluation");
    // Divide by the spacing actually achieved after float rounding of the
    // probe points, not the nominal 2*eps.
    grad[i] = static_cast<float>((up - down) / (x_up - x_down));
  }
  return grad;
}

}  // namespace voiceval
