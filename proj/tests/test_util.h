// tests/test_util.h

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

#ifndef VOICEVAL_TESTS_TEST_UTIL_H_
#define VOICEVAL_TESTS_TEST_UTIL_H_

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "voiceval/ops.h"
#include "voiceval/rng.h"
#include "voiceval/types.h"

namespace testutil {

// Norm-based relative error between an analytic gradient and its
// finite-difference estimate; the standard gradient-check metric.
inline double grad_rel_err(const voiceval::Vector &analytic,
                           const voiceval::Vector &numeric) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < analytic.dim(); ++i) {
    double d = static_cast<double>(analytic[i]) -
               static_cast<double>(numeric[i]);
    diff += d * d;
    na += static_cast<double>(analytic[i]) * static_cast<double>(analytic[i]);
    nb += static_cast<double>(numeric[i]) * static_cast<double>(numeric[i]);
  }
  double denom = std::max(std::sqrt(na), std::sqrt(nb));
  if (denom < 1e-12) return std::sqrt(diff);
  return std::sqrt(diff) / denom;
}

inline voiceval::Vector random_vector(voiceval::SplitMix64 &rng,
                                      std::size_t dim, float scale = 1.0f) {
  voiceval::Vector v(dim);
  for (std::size_t d = 0; d < dim; ++d) v[d] = scale * rng.gaussian();
  return v;
}

inline voiceval::Matrix random_matrix(voiceval::SplitMix64 &rng,
                                      std::size_t rows, std::size_t cols,
                                      float scale = 1.0f) {
  voiceval::Matrix m(rows, cols);
  for (float &x : m.data) x = scale * rng.gaussian();
  return m;
}

// Scratch directory for file-format tests, fresh per call site.
inline std::string scratch_dir(const std::string &name) {
  std::string dir =
      (std::filesystem::temp_directory_path() / ("voiceval_test_" + name))
          .string();
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(is),
                     std::istreambuf_iterator<char>());
}

}  // namespace testutil

#endif  // VOICEVAL_TESTS_TEST_UTIL_H_
