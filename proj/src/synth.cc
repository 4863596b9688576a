// src/synth.cc

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

#include "voiceval/synth.h"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "voiceval/ops.h"
#include "voiceval/rng.h"

namespace voiceval {

namespace {

// Stream tags; one independent SplitMix64 stream per concern so that
// changing one knob never shifts another's draws.
enum StreamTag : std::uint64_t {
  kCentroidStream = 0,
  kOffsetStream = 1,
  kNoiseStream = 2,
  kTrialStream = 3,
  kDiarStream = 4,
};

std::string pad_id(const char *prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%04zu", prefix, i);
  return std::string(buf);
}

std::vector<std::string> emotion_labels(const SynthConfig &cfg) {
  return emotion_set_labels("synth" + std::to_string(cfg.emotion_classes));
}

const Vector &offset_for(const SynthConfig &cfg, const std::string &attr,
                         const std::string &label) {
  auto attr_it = cfg.attribute_offsets.find(attr);
  if (attr_it == cfg.attribute_offsets.end())
    throw std::invalid_argument("synth: no offsets for attribute " + attr);
  auto it = attr_it->second.find(label);
  if (it == attr_it->second.end())
    throw std::invalid_argument("synth: no offset for " + attr + "=" + label);
  return it->second;
}

}  // namespace

void validate(const SynthConfig &cfg) {
  if (cfg.n_speakers < 1)
    throw std::invalid_argument("synth: n_speakers must be >= 1");
  if (cfg.utts_per_speaker < 1)
    throw std::invalid_argument("synth: utts_per_speaker must be >= 1");
  if (cfg.dim < 1) throw std::invalid_argument("synth: dim must be >= 1");
  if (cfg.frames_per_utt < 1)
    throw std::invalid_argument("synth: frames_per_utt must be >= 1");
  if (!(cfg.frame_rate_hz > 0.0f))
    throw std::invalid_argument("synth: frame_rate_hz must be > 0");
  if (cfg.noise_sigma < 0.0f)
    throw std::invalid_argument("synth: noise_sigma must be >= 0");
  if (cfg.emotion_classes < 1 || cfg.emotion_classes > 64)
    throw std::invalid_argument("synth: emotion_classes out of range");
  for (const auto &[attr, classes] : cfg.attribute_offsets)
    for (const auto &[label, offset] : classes)
      if (offset.dim() != cfg.dim)
        throw std::invalid_argument("synth: offset dim mismatch for " + attr +
                                    "=" + label);
}

void default_attribute_offsets(SynthConfig &cfg, float attr_scale) {
  SplitMix64 rng = derive_stream(cfg.seed, kOffsetStream);
  auto draw = [&](const std::vector<std::string> &labels) {
    std::map<std::string, Vector> offsets;
    for (const std::string &label : labels) {
      Vector v(cfg.dim);
      for (std::size_t d = 0; d < cfg.dim; ++d) v[d] = rng.gaussian();
      v = l2_normalize(v);
      for (std::size_t d = 0; d < cfg.dim; ++d) v[d] *= attr_scale;
      offsets[label] = std::move(v);
    }
    return offsets;
  };
  cfg.attribute_offsets.clear();
  cfg.attribute_offsets["age"] = draw(kAgeBins);
  cfg.attribute_offsets["gender"] = draw(kGenders);
  cfg.attribute_offsets["emotion"] = draw(emotion_labels(cfg));
}

SynthCorpus generate_corpus(const SynthConfig &cfg) {
  validate(cfg);
  const std::vector<std::string> emotions = emotion_labels(cfg);
  const std::string emotion_set = "synth" + std::to_string(cfg.emotion_classes);

  SynthCorpus corpus;
  SplitMix64 centroid_rng = derive_stream(cfg.seed, kCentroidStream);
  corpus.speaker_centroids.reserve(cfg.n_speakers);
  for (std::size_t s = 0; s < cfg.n_speakers; ++s) {
    Vector c(cfg.dim);
    for (std::size_t d = 0; d < cfg.dim; ++d) c[d] = centroid_rng.gaussian();
    corpus.speaker_centroids.push_back(std::move(c));
  }

  SplitMix64 noise_rng = derive_stream(cfg.seed, kNoiseStream);
  for (std::size_t s = 0; s < cfg.n_speakers; ++s) {
    const std::string spk = pad_id("spk", s);
    const std::string age = kAgeBins[s % kAgeBins.size()];
    const std::string gender = kGenders[s % kGenders.size()];
    for (std::size_t u = 0; u < cfg.utts_per_speaker; ++u) {
      const std::string emotion = emotions[u % emotions.size()];
      const std::string utt_id = spk + "-u" + std::to_string(u);

      Vector base(cfg.dim);
      for (std::size_t d = 0; d < cfg.dim; ++d)
        base[d] = corpus.speaker_centroids[s][d] * cfg.speaker_scale;
      for (const auto &[attr, label] :
           std::vector<std::pair<std::string, std::string>>{
               {"age", age}, {"gender", gender}, {"emotion", emotion}}) {
        if (cfg.attribute_offsets.count(attr) == 0) continue;
        const Vector &off = offset_for(cfg, attr, label);
        for (std::size_t d = 0; d < cfg.dim; ++d) base[d] += off[d];
      }

      Matrix frames(cfg.frames_per_utt, cfg.dim);
      for (std::size_t t = 0; t < cfg.frames_per_utt; ++t)
        for (std::size_t d = 0; d < cfg.dim; ++d)
          frames.at(t, d) = base[d] + cfg.noise_sigma * noise_rng.gaussian();
      corpus.embeddings.push_back(
          make_frame_embeddings(utt_id, std::move(frames), cfg.frame_rate_hz));

      UtteranceRecord rec;
      rec.utt_id = utt_id;
      rec.speaker = spk;
      rec.age = age;
      rec.gender = gender;
      rec.emotion = emotion;
      rec.emotion_set = emotion_set;
      rec.caption_id = "cap-" + utt_id;
      corpus.manifest.push_back(rec);

      CaptionRecord cap;
      cap.caption_id = "cap-" + utt_id;
      cap.utt_id = utt_id;
      cap.tokens = {"speaker", spk,     "age",     age,
                    "gender",  gender,  "emotion", emotion};
      corpus.captions.push_back(std::move(cap));
    }
  }

  // Balanced trials: one target per consecutive same-speaker pair (or a
  // self-pair when a speaker has a single utterance), matched by an equal
  // number of seeded cross-speaker pairs.
  auto utt_name = [&](std::size_t s, std::size_t u) {
    return pad_id("spk", s) + "-u" + std::to_string(u);
  };
  for (std::size_t s = 0; s < cfg.n_speakers; ++s) {
    if (cfg.utts_per_speaker == 1) {
      corpus.trials.push_back({utt_name(s, 0), utt_name(s, 0), true});
    } else {
      for (std::size_t u = 0; u + 1 < cfg.utts_per_speaker; ++u)
        corpus.trials.push_back({utt_name(s, u), utt_name(s, u + 1), true});
    }
  }
  std::size_t n_targets = corpus.trials.size();
  SplitMix64 trial_rng = derive_stream(cfg.seed, kTrialStream);
  for (std::size_t i = 0; i < n_targets; ++i) {
    if (cfg.n_speakers < 2) break;
    std::size_t a = trial_rng.below(cfg.n_speakers);
    std::size_t b = (a + 1 + trial_rng.below(cfg.n_speakers - 1)) %
                    cfg.n_speakers;
    std::size_t ua = trial_rng.below(cfg.utts_per_speaker);
    std::size_t ub = trial_rng.below(cfg.utts_per_speaker);
    corpus.trials.push_back({utt_name(a, ua), utt_name(b, ub), false});
  }
  return corpus;
}

TemplateSet make_prompt_templates(const SynthConfig &cfg, Task task,
                                  std::size_t n_templates) {
  if (n_templates < 1)
    throw std::invalid_argument("make_prompt_templates: need >= 1 template");
  std::vector<std::string> classes;
  std::string kw;
  switch (task) {
    case Task::kAge:
      classes = kAgeBins;
      kw = "age";
      break;
    case Task::kGender:
      classes = kGenders;
      kw = "gender";
      break;
    case Task::kEmotion:
      classes = emotion_labels(cfg);
      kw = "emotion";
      break;
    case Task::kSid:
      throw std::invalid_argument(
          "make_prompt_templates: sid has no prompt classes");
  }

  TemplateSet templates;
  for (const std::string &c : classes) {
    std::vector<std::vector<std::string>> variants;
    for (std::size_t j = 0; j < n_templates; ++j) {
      switch (j % 10) {
        case 0: variants.push_back({kw, c}); break;
        case 1: variants.push_back({c}); break;
        case 2: variants.push_back({"speaker", kw, c}); break;
        case 3: variants.push_back({kw, c, "speaker"}); break;
        case 4: variants.push_back({c, kw}); break;
        case 5: variants.push_back({"speaker", c}); break;
        case 6: variants.push_back({kw, kw, c}); break;
        case 7: variants.push_back({c, "speaker", kw}); break;
        case 8: variants.push_back({kw, "speaker", c}); break;
        case 9: variants.push_back({c, c, kw}); break;
      }
    }
    templates[c] = std::move(variants);
  }
  return templates;
}

DiarSessionSet generate_diar_sessions(const SynthConfig &cfg,
                                      std::size_t n_sessions,
                                      std::size_t speakers_per_session,
                                      std::size_t segments_per_session,
                                      double seg_min_s, double seg_max_s) {
  validate(cfg);
  if (speakers_per_session < 1 || speakers_per_session > cfg.n_speakers)
    throw std::invalid_argument(
        "generate_diar_sessions: speakers_per_session out of range");
  if (segments_per_session < 1)
    throw std::invalid_argument(
        "generate_diar_sessions: need >= 1 segment per session");
  if (!(seg_min_s <= seg_max_s))
    throw std::invalid_argument("generate_diar_sessions: bad length range");

  // Regenerate the same centroids/offsets the corpus uses.
  SplitMix64 centroid_rng = derive_stream(cfg.seed, kCentroidStream);
  std::vector<Vector> centroids(cfg.n_speakers);
  for (std::size_t s = 0; s < cfg.n_speakers; ++s) {
    centroids[s] = Vector(cfg.dim);
    for (std::size_t d = 0; d < cfg.dim; ++d)
      centroids[s][d] = centroid_rng.gaussian();
  }

  double rate = static_cast<double>(cfg.frame_rate_hz);
  SplitMix64 rng = derive_stream(cfg.seed, kDiarStream);
  DiarSessionSet set;
  for (std::size_t sess = 0; sess < n_sessions; ++sess) {
    const std::string session_id = pad_id("sess", sess);
    std::vector<std::size_t> speakers(speakers_per_session);
    for (std::size_t k = 0; k < speakers_per_session; ++k)
      speakers[k] = (sess * speakers_per_session + k) % cfg.n_speakers;

    std::vector<std::size_t> seg_speaker(segments_per_session);
    std::vector<std::size_t> seg_frames(segments_per_session);
    std::size_t total_frames = 0;
    for (std::size_t g = 0; g < segments_per_session; ++g) {
      seg_speaker[g] = speakers[g % speakers_per_session];
      double len_s = rng.uniform_range(seg_min_s, seg_max_s);
      auto frames = static_cast<long long>(std::llround(len_s * rate));
      if (frames < 1)
        throw std::invalid_argument(
            "generate_diar_sessions: segment shorter than one frame");
      seg_frames[g] = static_cast<std::size_t>(frames);
      total_frames += seg_frames[g];
    }

    Matrix frames(total_frames, cfg.dim);
    std::size_t cursor = 0;
    for (std::size_t g = 0; g < segments_per_session; ++g) {
      std::size_t s = seg_speaker[g];
      Vector base(cfg.dim);
      for (std::size_t d = 0; d < cfg.dim; ++d)
        base[d] = centroids[s][d] * cfg.speaker_scale;
      // Speaker-determined attributes only; emotion varies per utterance in
      // the corpus and would add within-speaker variance here.
      const std::string age = kAgeBins[s % kAgeBins.size()];
      const std::string gender = kGenders[s % kGenders.size()];
      for (const auto &[attr, label] :
           std::vector<std::pair<std::string, std::string>>{
               {"age", age}, {"gender", gender}}) {
        if (cfg.attribute_offsets.count(attr) == 0) continue;
        const Vector &off = offset_for(cfg, attr, label);
        for (std::size_t d = 0; d < cfg.dim; ++d) base[d] += off[d];
      }

      DiarSegment seg;
      seg.session_id = session_id;
      seg.speaker = pad_id("spk", s);
      seg.start_s = static_cast<double>(cursor) / rate;
      seg.end_s = static_cast<double>(cursor + seg_frames[g]) / rate;
      set.reference.push_back(seg);

      for (std::size_t t = 0; t < seg_frames[g]; ++t, ++cursor)
        for (std::size_t d = 0; d < cfg.dim; ++d)
          frames.at(cursor, d) = base[d] + cfg.noise_sigma * rng.gaussian();
    }
    set.sessions.push_back(make_frame_embeddings(session_id, std::move(frames),
                                                 cfg.frame_rate_hz));
  }
  return set;
}

}  // namespace voiceval
