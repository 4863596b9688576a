// voiceval/archive.h

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

#ifndef VOICEVAL_ARCHIVE_H_
#define VOICEVAL_ARCHIVE_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "voiceval/embedding.h"

namespace voiceval {

// Embedding archive, binary format "AUDV" (all little-endian):
//   magic "AUDV" | version u32 = 1 | dim u32 | frame_rate f32 | count u64
// then per entry:
//   utt_id len u16 + UTF-8 bytes | frame count u32 |
//   mask packed bits, LSB-first, ceil(T/8) bytes | frames f32 row-major
// Writing is deterministic: the same records always produce the same bytes.

void write_archive(const std::vector<FrameEmbeddings> &records,
                   const std::string &path, std::uint32_t dim,
                   float frame_rate_hz);

// Derives dim/frame_rate from the records; errors on an empty list.
void write_archive(const std::vector<FrameEmbeddings> &records,
                   const std::string &path);

std::vector<FrameEmbeddings> read_archive(const std::string &path);

// Parameter container, binary format "AUDH": same framing as "AUDV" with
//   magic "AUDH" | version u32 = 1 | tag u16 + bytes | tensor count u64
// then per tensor (sorted by name):
//   name u16 + bytes | rows u32 | cols u32 | f32 row-major data
// Vectors are stored as 1 x n, scalars as 1 x 1.
struct TensorBundle {
  std::string tag;
  std::map<std::string, Matrix> tensors;

  bool has(const std::string &name) const { return tensors.count(name) > 0; }
  void set_matrix(const std::string &name, Matrix m);
  void set_vector(const std::string &name, const Vector &v);
  void set_scalar(const std::string &name, float value);
  const Matrix &get_matrix(const std::string &name) const;
  Vector get_vector(const std::string &name) const;
  float get_scalar(const std::string &name) const;
};

void write_bundle(const TensorBundle &bundle, const std::string &path);
TensorBundle read_bundle(const std::string &path);

}  // namespace voiceval

#endif  // VOICEVAL_ARCHIVE_H_
