// src/manifest.cc

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

#include "voiceval/manifest.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace voiceval {

using nlohmann::json;

const std::vector<std::string> kAgeBins = {"teenager", "young-adult",
                                           "middle-aged-adult", "senior"};
const std::vector<std::string> kGenders = {"m", "f"};

std::vector<std::string> emotion_set_labels(const std::string &set_name) {
  if (set_name == "basic6")
    return {"angry", "disgust", "fear", "happy", "neutral", "sad"};
  if (set_name == "basic8")
    return {"angry", "calm",    "disgust", "fear",
            "happy", "neutral", "sad",     "surprise"};
  if (set_name.rfind("synth", 0) == 0) {
    const std::string digits = set_name.substr(5);
    if (!digits.empty() &&
        digits.find_first_not_of("0123456789") == std::string::npos) {
      int n = std::stoi(digits);
      if (n >= 1 && n <= 64) {
        std::vector<std::string> labels;
        for (int i = 0; i < n; ++i) labels.push_back("e" + std::to_string(i));
        return labels;
      }
    }
  }
  throw std::invalid_argument("unknown emotion set: " + set_name);
}

namespace {

std::string line_err(std::size_t line_no, const std::string &msg) {
  return "manifest line " + std::to_string(line_no) + ": " + msg;
}

std::optional<std::string> opt_string(const json &obj, const char *key,
                                      std::size_t line_no) {
  if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
  if (!obj[key].is_string())
    throw std::runtime_error(
        line_err(line_no, std::string(key) + " must be a string"));
  return obj[key].get<std::string>();
}

void check_label(const std::optional<std::string> &value,
                 const std::vector<std::string> &vocab, const char *what,
                 std::size_t line_no) {
  if (!value) return;
  if (std::find(vocab.begin(), vocab.end(), *value) == vocab.end())
    throw std::runtime_error(
        line_err(line_no, std::string("unknown ") + what + " label '" +
                              *value + "'"));
}

}  // namespace

std::vector<UtteranceRecord> load_manifest(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open manifest: " + path);

  std::vector<UtteranceRecord> records;
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error &e) {
      throw std::runtime_error(line_err(line_no, e.what()));
    }
    if (!obj.is_object())
      throw std::runtime_error(line_err(line_no, "expected a JSON object"));
    UtteranceRecord rec;
    auto utt_id = opt_string(obj, "utt_id", line_no);
    if (!utt_id || utt_id->empty())
      throw std::runtime_error(line_err(line_no, "missing utt_id"));
    rec.utt_id = *utt_id;
    if (!seen_ids.insert(rec.utt_id).second)
      throw std::runtime_error(
          line_err(line_no, "duplicate utt_id '" + rec.utt_id + "'"));
    rec.speaker = opt_string(obj, "speaker", line_no);
    rec.age = opt_string(obj, "age", line_no);
    rec.gender = opt_string(obj, "gender", line_no);
    rec.emotion = opt_string(obj, "emotion", line_no);
    rec.emotion_set = opt_string(obj, "emotion_set", line_no);
    rec.caption_id = opt_string(obj, "caption_id", line_no);

    check_label(rec.age, kAgeBins, "age", line_no);
    check_label(rec.gender, kGenders, "gender", line_no);
    if (rec.emotion) {
      if (!rec.emotion_set)
        throw std::runtime_error(
            line_err(line_no, "emotion present without emotion_set"));
      std::vector<std::string> labels;
      try {
        labels = emotion_set_labels(*rec.emotion_set);
      } catch (const std::invalid_argument &e) {
        throw std::runtime_error(line_err(line_no, e.what()));
      }
      check_label(rec.emotion, labels, "emotion", line_no);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

void save_manifest(const std::vector<UtteranceRecord> &records,
                   const std::string &path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  for (const UtteranceRecord &rec : records) {
    json obj;
    obj["utt_id"] = rec.utt_id;
    if (rec.speaker) obj["speaker"] = *rec.speaker;
    if (rec.age) obj["age"] = *rec.age;
    if (rec.gender) obj["gender"] = *rec.gender;
    if (rec.emotion) obj["emotion"] = *rec.emotion;
    if (rec.emotion_set) obj["emotion_set"] = *rec.emotion_set;
    if (rec.caption_id) obj["caption_id"] = *rec.caption_id;
    os << obj.dump() << "\n";
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

Task parse_task(const std::string &name) {
  if (name == "sid") return Task::kSid;
  if (name == "age") return Task::kAge;
  if (name == "gender") return Task::kGender;
  if (name == "emotion") return Task::kEmotion;
  throw std::invalid_argument("unknown task: " + name);
}

std::string task_name(Task task) {
  switch (task) {
    case Task::kSid: return "sid";
    case Task::kAge: return "age";
    case Task::kGender: return "gender";
    case Task::kEmotion: return "emotion";
  }
  return "?";
}

std::optional<std::string> task_label(const UtteranceRecord &rec, Task task) {
  switch (task) {
    case Task::kSid: return rec.speaker;
    case Task::kAge: return rec.age;
    case Task::kGender: return rec.gender;
    case Task::kEmotion: return rec.emotion;
  }
  return std::nullopt;
}

std::vector<std::string> task_classes(
    const std::vector<UtteranceRecord> &records, Task task) {
  switch (task) {
    case Task::kSid: {
      std::set<std::string> speakers;
      for (const UtteranceRecord &rec : records)
        if (rec.speaker) speakers.insert(*rec.speaker);
      if (speakers.empty())
        throw std::runtime_error("task_classes: no speaker labels present");
      return {speakers.begin(), speakers.end()};
    }
    case Task::kAge: return kAgeBins;
    case Task::kGender: return kGenders;
    case Task::kEmotion: {
      std::set<std::string> sets;
      for (const UtteranceRecord &rec : records)
        if (rec.emotion_set) sets.insert(*rec.emotion_set);
      if (sets.empty())
        throw std::runtime_error("task_classes: no emotion_set declared");
      if (sets.size() > 1)
        throw std::runtime_error(
            "task_classes: mixed emotion sets in one manifest");
      return emotion_set_labels(*sets.begin());
    }
  }
  throw std::invalid_argument("task_classes: bad task");
}

}  // namespace voiceval
