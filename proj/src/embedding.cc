// src/embedding.cc

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

#include "voiceval/embedding.h"

#include <stdexcept>

namespace voiceval {

std::size_t FrameEmbeddings::num_valid() const {
  std::size_t n = 0;
  for (std::uint8_t v : valid) n += (v != 0);
  return n;
}

FrameEmbeddings make_frame_embeddings(std::string utt_id, Matrix frames,
                                      float frame_rate_hz) {
  FrameEmbeddings fe;
  fe.utt_id = std::move(utt_id);
  fe.frame_rate_hz = frame_rate_hz;
  fe.valid.assign(frames.rows, 1);
  fe.frames = std::move(frames);
  return fe;
}

Vector mean_pool(const FrameEmbeddings &fe) {
  if (fe.valid.size() != fe.frames.rows)
    throw std::invalid_argument("mean_pool: mask/frame count mismatch");
  std::size_t count = fe.num_valid();
  if (count == 0) throw std::invalid_argument("mean_pool: no valid frames");

  std::vector<double> acc(fe.dim(), 0.0);
  for (std::size_t t = 0; t < fe.num_frames(); ++t) {
    if (!fe.valid[t]) continue;
    const float *row = fe.frames.row(t);
    for (std::size_t d = 0; d < fe.dim(); ++d)
      acc[d] += static_cast<double>(row[d]);
  }
  Vector out(fe.dim());
  for (std::size_t d = 0; d < fe.dim(); ++d)
    out[d] = static_cast<float>(acc[d] / static_cast<double>(count));
  return out;
}

Matrix valid_frames(const FrameEmbeddings &fe) {
  Matrix out(fe.num_valid(), fe.dim());
  std::size_t r = 0;
  for (std::size_t t = 0; t < fe.num_frames(); ++t) {
    if (!fe.valid[t]) continue;
    const float *src = fe.frames.row(t);
    float *dst = out.row(r++);
    for (std::size_t d = 0; d < fe.dim(); ++d) dst[d] = src[d];
  }
  return out;
}

}  // namespace voiceval
