// voiceval/ops.h

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

#ifndef VOICEVAL_OPS_H_
#define VOICEVAL_OPS_H_

#include <cstdint>
#include <functional>

#include "voiceval/types.h"

namespace voiceval {

// Double-accumulated reductions, ascending index order throughout so results
// are identical run to run and thread-count independent.
double dot(const Vector &a, const Vector &b);
double squared_norm(const Vector &v);
double norm(const Vector &v);

// Numerically stable softmax (max subtraction). Errors on empty input.
Vector softmax(const Vector &logits);

struct CrossEntropyResult {
  double loss = 0.0;
  Vector grad_logits;  // softmax(logits) - one_hot(label)
};

// loss = -log softmax(logits)[label]. Errors if label out of range.
CrossEntropyResult cross_entropy(const Vector &logits, std::size_t label);

// a.b / (|a||b|), clamped to [-1, 1]. Errors on zero-norm input or dim
// mismatch; a zero norm is never silently scored as 0.
double cosine(const Vector &a, const Vector &b);

// v / |v|. Errors on the zero vector.
Vector l2_normalize(const Vector &v);

struct AdamState {
  std::uint64_t step = 0;
  Vector first_moment;
  Vector second_moment;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;

  AdamState() = default;
  explicit AdamState(std::size_t n) : first_moment(n), second_moment(n) {}
};

// Standard Adam update with bias correction; increments state.step.
// Bitwise deterministic for identical inputs. Errors on shape mismatch.
void adam_step(Vector &params, const Vector &grads, AdamState &state,
               float lr);

// Central differences (f(x+eps*e_i) - f(x-eps*e_i)) / (2*eps). Errors if f
// evaluates to a non-finite value. Test oracle for every analytic gradient
// in this library; keep it independent of the paths it checks.
Vector finite_diff_grad(const std::function<double(const Vector &)> &f,
                        const Vector &x, double eps);

}  // namespace voiceval

#endif  // VOICEVAL_OPS_H_
