// voiceval/manifest.h

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

#ifndef VOICEVAL_MANIFEST_H_
#define VOICEVAL_MANIFEST_H_

#include <optional>
#include <string>
#include <vector>

namespace voiceval {

// Fixed label vocabularies. Age and gender are global; emotion labels come
// from a named set so corpora with different emotion granularity coexist.
extern const std::vector<std::string> kAgeBins;   // 4 bins
extern const std::vector<std::string> kGenders;   // m, f

// Named emotion sets: "basic6", "basic8", and "synthN" (classes e0..e{N-1})
// for N in 1..64. Errors on an unknown name.
std::vector<std::string> emotion_set_labels(const std::string &set_name);

struct UtteranceRecord {
  std::string utt_id;
  std::optional<std::string> speaker;
  std::optional<std::string> age;          // one of kAgeBins
  std::optional<std::string> gender;       // one of kGenders
  std::optional<std::string> emotion;
  std::optional<std::string> emotion_set;  // required when emotion is set
  std::optional<std::string> caption_id;
};

// JSON-lines manifest, one object per utterance with keys utt_id, speaker,
// age, gender, emotion, emotion_set, caption_id (all but utt_id optional).
// Errors carry the 1-based line number: unknown label, duplicate utt_id,
// malformed JSON.
std::vector<UtteranceRecord> load_manifest(const std::string &path);
void save_manifest(const std::vector<UtteranceRecord> &records,
                   const std::string &path);

enum class Task { kSid, kAge, kGender, kEmotion };

Task parse_task(const std::string &name);
std::string task_name(Task task);

// The record's label for a task, if present.
std::optional<std::string> task_label(const UtteranceRecord &rec, Task task);

// Canonical class list for a task over a manifest: SID = sorted unique
// speaker ids; age/gender = the fixed vocabularies; emotion = the label order
// of the manifest's declared emotion set (which must be unique).
std::vector<std::string> task_classes(
    const std::vector<UtteranceRecord> &records, Task task);

}  // namespace voiceval

#endif  // VOICEVAL_MANIFEST_H_
