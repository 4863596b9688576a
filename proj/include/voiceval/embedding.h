// voiceval/embedding.h

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

#ifndef VOICEVAL_EMBEDDING_H_
#define VOICEVAL_EMBEDDING_H_

#include <cstdint>
#include <string>
#include <vector>

#include "voiceval/types.h"

namespace voiceval {

// Frame-level embeddings for one utterance: a T x dim matrix plus a validity
// mask. The mask is caller-provided (typically "non-padding"); pooling and
// frame-logit averaging consume only valid frames.
struct FrameEmbeddings {
  std::string utt_id;
  float frame_rate_hz = 25.0f;
  Matrix frames;                     // T x dim
  std::vector<std::uint8_t> valid;   // per-frame, 1 = valid

  std::size_t num_frames() const { return frames.rows; }
  std::size_t dim() const { return frames.cols; }
  std::size_t num_valid() const;
};

// Builds an all-valid FrameEmbeddings from a matrix.
FrameEmbeddings make_frame_embeddings(std::string utt_id, Matrix frames,
                                      float frame_rate_hz = 25.0f);

// Arithmetic mean over valid frames. Errors when no frame is valid.
Vector mean_pool(const FrameEmbeddings &fe);

// Rows of fe.frames with a set mask bit, in order.
Matrix valid_frames(const FrameEmbeddings &fe);

}  // namespace voiceval

#endif  // VOICEVAL_EMBEDDING_H_
