// voiceval/parallel.h

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

#ifndef VOICEVAL_PARALLEL_H_
#define VOICEVAL_PARALLEL_H_

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace voiceval {

// Runs fn(i) for i in [0, n) on up to `threads` workers with static
// contiguous partitioning. Each index writes only its own output slot, and
// callers reduce sequentially afterwards, so results are identical for any
// thread count.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t)> &fn) {
  if (threads < 1) threads = 1;
  std::size_t workers = static_cast<std::size_t>(threads);
  if (workers > n) workers = n == 0 ? 1 : n;
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t begin = n * w / workers;
    std::size_t end = n * (w + 1) / workers;
    pool.emplace_back([begin, end, &fn]() {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (std::thread &t : pool) t.join();
}

}  // namespace voiceval

#endif  // VOICEVAL_PARALLEL_H_
