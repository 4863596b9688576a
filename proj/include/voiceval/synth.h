// voiceval/synth.h

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

#ifndef VOICEVAL_SYNTH_H_
#define VOICEVAL_SYNTH_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "voiceval/captions.h"
#include "voiceval/embedding.h"
#include "voiceval/manifest.h"
#include "voiceval/speaker_eval.h"
#include "voiceval/types.h"

namespace voiceval {

// Gaussian cluster corpus: every frame of an utterance is
//   speaker_centroid * speaker_scale + sum of attribute offsets + N(0, sigma^2)
// with centroids and offsets drawn once from the seeded SplitMix64 stream.
// Age and gender are assigned round-robin per speaker, emotion round-robin
// per utterance, so labels stay balanced.
struct SynthConfig {
  std::size_t n_speakers = 8;
  std::size_t utts_per_speaker = 10;
  std::size_t dim = 16;
  std::size_t frames_per_utt = 20;
  float frame_rate_hz = 25.0f;
  float speaker_scale = 1.0f;
  // attribute name ("age"|"gender"|"emotion") -> class label -> offset
  std::map<std::string, std::map<std::string, Vector>> attribute_offsets;
  float noise_sigma = 0.05f;
  std::size_t emotion_classes = 6;  // label set "synth<N>"
  std::uint64_t seed = 0;
};

void validate(const SynthConfig &cfg);

// Fills cfg.attribute_offsets with seeded random vectors of norm attr_scale,
// one per class of each attribute, drawn from a stream independent of the
// corpus noise.
void default_attribute_offsets(SynthConfig &cfg, float attr_scale);

struct SynthCorpus {
  std::vector<FrameEmbeddings> embeddings;
  std::vector<UtteranceRecord> manifest;
  std::vector<Trial> trials;
  std::vector<CaptionRecord> captions;
  std::vector<Vector> speaker_centroids;  // unscaled, for oracles
};

SynthCorpus generate_corpus(const SynthConfig &cfg);

// Prompt templates whose tokens all occur in the corpus captions: per class,
// n_templates token-list variants naming the class.
TemplateSet make_prompt_templates(const SynthConfig &cfg, Task task,
                                  std::size_t n_templates = 10);

struct DiarSessionSet {
  std::vector<FrameEmbeddings> sessions;  // utt_id = session id
  std::vector<DiarSegment> reference;
};

// Sessions of alternating fixed-speaker segments with exactly known
// boundaries; oracle VAD world (every frame is speech, no overlap). Segment
// lengths are drawn uniformly in [seg_min_s, seg_max_s] and rounded to whole
// frames; a segment that rounds below one frame is an error.
DiarSessionSet generate_diar_sessions(const SynthConfig &cfg,
                                      std::size_t n_sessions,
                                      std::size_t speakers_per_session,
                                      std::size_t segments_per_session,
                                      double seg_min_s, double seg_max_s);

}  // namespace voiceval

#endif  // VOICEVAL_SYNTH_H_
