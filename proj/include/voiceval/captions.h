// voiceval/captions.h

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

#ifndef VOICEVAL_CAPTIONS_H_
#define VOICEVAL_CAPTIONS_H_

#include <map>
#include <string>
#include <vector>

namespace voiceval {

// One caption paired with one utterance; tokens are whitespace-free strings.
struct CaptionRecord {
  std::string caption_id;
  std::string utt_id;
  std::vector<std::string> tokens;
};

// JSON-lines: {"caption_id": ..., "utt_id": ..., "tokens": [...]}
std::vector<CaptionRecord> load_captions(const std::string &path);
void save_captions(const std::vector<CaptionRecord> &captions,
                   const std::string &path);

// Prompt templates for one task: class label -> list of token sequences.
// Every class must carry the same number of templates.
using TemplateSet = std::map<std::string, std::vector<std::vector<std::string>>>;

// JSON object: {"<class>": [["tok", ...], ...], ...}
TemplateSet load_templates(const std::string &path);
void save_templates(const TemplateSet &templates, const std::string &path);

}  // namespace voiceval

#endif  // VOICEVAL_CAPTIONS_H_
