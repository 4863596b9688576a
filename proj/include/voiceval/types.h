// voiceval/types.h

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

#ifndef VOICEVAL_TYPES_H_
#define VOICEVAL_TYPES_H_

#include <cstddef>
#include <string>
#include <vector>

namespace voiceval {

// Dense single-precision vector. Reductions over it are accumulated in
// double, in ascending index order (see ops.h).
struct Vector {
  std::vector<float> data;

  Vector() = default;
  explicit Vector(std::size_t dim, float value = 0.0f) : data(dim, value) {}
  explicit Vector(std::vector<float> values) : data(std::move(values)) {}

  std::size_t dim() const { return data.size(); }
  float &operator[](std::size_t i) { return data[i]; }
  float operator[](std::size_t i) const { return data[i]; }
};

// Dense single-precision matrix, row-major.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, float value = 0.0f)
      : rows(r), cols(c), data(r * c, value) {}

  float &at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  float at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  float *row(std::size_t r) { return data.data() + r * cols; }
  const float *row(std::size_t r) const { return data.data() + r * cols; }
};

bool all_finite(const Vector &v);
bool all_finite(const Matrix &m);

// Copies row r of m into a Vector.
Vector matrix_row(const Matrix &m, std::size_t r);

}  // namespace voiceval

#endif  // VOICEVAL_TYPES_H_
