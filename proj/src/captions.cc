// src/captions.cc

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

#include "voiceval/captions.h"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace voiceval {

using nlohmann::json;

std::vector<CaptionRecord> load_captions(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open captions: " + path);
  std::vector<CaptionRecord> captions;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error &e) {
      throw std::runtime_error("captions line " + std::to_string(line_no) +
                               ": " + e.what());
    }
    CaptionRecord rec;
    rec.caption_id = obj.at("caption_id").get<std::string>();
    rec.utt_id = obj.at("utt_id").get<std::string>();
    for (const auto &tok : obj.at("tokens"))
      rec.tokens.push_back(tok.get<std::string>());
    if (rec.tokens.empty())
      throw std::runtime_error("captions line " + std::to_string(line_no) +
                               ": empty token list");
    captions.push_back(std::move(rec));
  }
  return captions;
}

void save_captions(const std::vector<CaptionRecord> &captions,
                   const std::string &path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  for (const CaptionRecord &rec : captions) {
    json obj;
    obj["caption_id"] = rec.caption_id;
    obj["utt_id"] = rec.utt_id;
    obj["tokens"] = rec.tokens;
    os << obj.dump() << "\n";
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

TemplateSet load_templates(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open templates: " + path);
  json obj = json::parse(is);
  if (!obj.is_object())
    throw std::runtime_error("templates must be a JSON object: " + path);
  TemplateSet templates;
  std::size_t expected = 0;
  for (const auto &[cls, arr] : obj.items()) {
    std::vector<std::vector<std::string>> lists;
    for (const auto &tmpl : arr) {
      std::vector<std::string> tokens;
      for (const auto &tok : tmpl) tokens.push_back(tok.get<std::string>());
      if (tokens.empty())
        throw std::runtime_error("empty template for class '" + cls + "'");
      lists.push_back(std::move(tokens));
    }
    if (lists.empty())
      throw std::runtime_error("no templates for class '" + cls + "'");
    if (expected == 0) expected = lists.size();
    if (lists.size() != expected)
      throw std::runtime_error("template count differs for class '" + cls +
                               "'");
    templates[cls] = std::move(lists);
  }
  if (templates.empty())
    throw std::runtime_error("templates file has no classes: " + path);
  return templates;
}

void save_templates(const TemplateSet &templates, const std::string &path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  json obj = json::object();
  for (const auto &[cls, lists] : templates) obj[cls] = lists;
  os << obj.dump(2) << "\n";
  if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace voiceval
