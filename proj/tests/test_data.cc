// tests/test_data.cc

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

#include <fstream>

#include <doctest.h>

#include "test_util.h"
#include "voiceval/archive.h"
#include "voiceval/embedding.h"
#include "voiceval/manifest.h"

using namespace voiceval;

namespace {

FrameEmbeddings two_frame_utt() {
  Matrix frames(2, 2);
  frames.at(0, 0) = 1.0f;
  frames.at(0, 1) = 3.0f;
  frames.at(1, 0) = 3.0f;
  frames.at(1, 1) = 1.0f;
  return make_frame_embeddings("utt0", std::move(frames));
}

}  // namespace

TEST_CASE("mean_pool worked values") {
  Matrix one(1, 3);
  one.at(0, 0) = 1.0f;
  one.at(0, 1) = 2.0f;
  one.at(0, 2) = 3.0f;
  FrameEmbeddings single = make_frame_embeddings("u", std::move(one));
  Vector p = mean_pool(single);
  CHECK(p[0] == 1.0f);
  CHECK(p[1] == 2.0f);
  CHECK(p[2] == 3.0f);

  Vector avg = mean_pool(two_frame_utt());
  CHECK(avg[0] == doctest::Approx(2.0));
  CHECK(avg[1] == doctest::Approx(2.0));

  // masked frame is excluded entirely
  Matrix frames(2, 2);
  frames.at(0, 0) = 1.0f;
  frames.at(0, 1) = 1.0f;
  frames.at(1, 0) = 9.0f;
  frames.at(1, 1) = 9.0f;
  FrameEmbeddings masked = make_frame_embeddings("m", std::move(frames));
  masked.valid[1] = 0;
  Vector mp = mean_pool(masked);
  CHECK(mp[0] == 1.0f);
  CHECK(mp[1] == 1.0f);

  masked.valid[0] = 0;
  CHECK_THROWS(mean_pool(masked));
}

TEST_CASE("mean_pool permutation and duplication properties") {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t t = 2 + rng.below(6);
    std::size_t d = 1 + rng.below(5);
    Matrix frames = testutil::random_matrix(rng, t, d);
    FrameEmbeddings fe = make_frame_embeddings("u", frames);
    Vector base = mean_pool(fe);

    // permute rows
    std::vector<std::size_t> perm(t);
    for (std::size_t i = 0; i < t; ++i) perm[i] = i;
    rng.shuffle(perm);
    Matrix shuffled(t, d);
    for (std::size_t i = 0; i < t; ++i)
      for (std::size_t j = 0; j < d; ++j)
        shuffled.at(i, j) = frames.at(perm[i], j);
    Vector permuted = mean_pool(make_frame_embeddings("u", shuffled));
    for (std::size_t j = 0; j < d; ++j)
      CHECK(permuted[j] == doctest::Approx(base[j]).epsilon(1e-6));

    // duplicating every frame leaves the mean exactly unchanged
    Matrix doubled(2 * t, d);
    for (std::size_t i = 0; i < t; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        doubled.at(i, j) = frames.at(i, j);
        doubled.at(t + i, j) = frames.at(i, j);
      }
    Vector dup = mean_pool(make_frame_embeddings("u", doubled));
    for (std::size_t j = 0; j < d; ++j) CHECK(dup[j] == base[j]);
  }
}

TEST_CASE("archive round-trip and byte determinism") {
  std::string dir = testutil::scratch_dir("archive");
  std::vector<FrameEmbeddings> records;
  records.push_back(two_frame_utt());
  Matrix frames(3, 2);
  SplitMix64 rng(3);
  for (float &x : frames.data) x = rng.gaussian();
  FrameEmbeddings second = make_frame_embeddings("utt1", std::move(frames));
  second.valid[1] = 0;
  records.push_back(second);

  std::string path = dir + "/a.audv";
  write_archive(records, path);
  std::vector<FrameEmbeddings> loaded = read_archive(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].utt_id == "utt0");
  CHECK(loaded[1].utt_id == "utt1");
  CHECK(loaded[1].valid[1] == 0);
  CHECK(loaded[1].valid[0] == 1);
  for (std::size_t i = 0; i < records.size(); ++i) {
    REQUIRE(loaded[i].frames.rows == records[i].frames.rows);
    for (std::size_t k = 0; k < records[i].frames.data.size(); ++k)
      CHECK(loaded[i].frames.data[k] == records[i].frames.data[k]);
  }

  // byte-identical re-serialization
  std::string path2 = dir + "/b.audv";
  write_archive(loaded, path2);
  CHECK(testutil::slurp(path) == testutil::slurp(path2));

  // empty archive: header-only, reads back empty
  std::string empty_path = dir + "/empty.audv";
  write_archive({}, empty_path, 4, 25.0f);
  CHECK(read_archive(empty_path).empty());
}

TEST_CASE("archive error cases are distinct") {
  std::string dir = testutil::scratch_dir("archive_err");
  std::string path = dir + "/a.audv";
  write_archive({two_frame_utt()}, path);

  // bad magic
  {
    std::string bytes = testutil::slurp(path);
    bytes[0] = 'X';
    std::ofstream os(dir + "/bad_magic.audv", std::ios::binary);
    os << bytes;
  }
  CHECK_THROWS_WITH_AS(read_archive(dir + "/bad_magic.audv"),
                       doctest::Contains("bad magic"), std::runtime_error);

  // version mismatch
  {
    std::string bytes = testutil::slurp(path);
    bytes[4] = 9;
    std::ofstream os(dir + "/bad_version.audv", std::ios::binary);
    os << bytes;
  }
  CHECK_THROWS_WITH_AS(read_archive(dir + "/bad_version.audv"),
                       doctest::Contains("version mismatch"),
                       std::runtime_error);

  // truncated
  {
    std::string bytes = testutil::slurp(path);
    bytes.resize(bytes.size() - 5);
    std::ofstream os(dir + "/trunc.audv", std::ios::binary);
    os << bytes;
  }
  CHECK_THROWS_WITH_AS(read_archive(dir + "/trunc.audv"),
                       doctest::Contains("truncated"), std::runtime_error);

  // dim mismatch on write
  Matrix odd(1, 3, 1.0f);
  CHECK_THROWS_WITH_AS(
      write_archive({two_frame_utt(), make_frame_embeddings("x", odd)},
                    dir + "/mix.audv"),
      doctest::Contains("dim mismatch"), std::invalid_argument);
}

TEST_CASE("tensor bundle round-trip") {
  std::string dir = testutil::scratch_dir("bundle");
  TensorBundle bundle;
  bundle.tag = "probe:gender:m,f";
  SplitMix64 rng(5);
  bundle.set_matrix("W", testutil::random_matrix(rng, 4, 2));
  bundle.set_vector("b", testutil::random_vector(rng, 2));
  bundle.set_scalar("s", 3.5f);
  std::string path = dir + "/h.audh";
  write_bundle(bundle, path);

  TensorBundle loaded = read_bundle(path);
  CHECK(loaded.tag == bundle.tag);
  CHECK(loaded.get_scalar("s") == 3.5f);
  CHECK(loaded.get_matrix("W").rows == 4);
  for (std::size_t i = 0; i < bundle.get_matrix("W").data.size(); ++i)
    CHECK(loaded.get_matrix("W").data[i] == bundle.get_matrix("W").data[i]);
  CHECK_THROWS(loaded.get_matrix("missing"));

  std::string path2 = dir + "/h2.audh";
  write_bundle(loaded, path2);
  CHECK(testutil::slurp(path) == testutil::slurp(path2));
}

TEST_CASE("manifest load and validation") {
  std::string dir = testutil::scratch_dir("manifest");
  std::string path = dir + "/m.jsonl";
  {
    std::ofstream os(path);
    os << R"({"utt_id":"u0","speaker":"spk0","age":"teenager","gender":"m","emotion":"happy","emotion_set":"basic6","caption_id":"c0"})"
       << "\n";
    os << R"({"utt_id":"u1","speaker":"spk1","age":"senior","gender":"f"})"
       << "\n";
  }
  std::vector<UtteranceRecord> records = load_manifest(path);
  REQUIRE(records.size() == 2);
  CHECK(records[0].emotion.value() == "happy");
  CHECK(records[0].caption_id.value() == "c0");
  CHECK_FALSE(records[1].emotion.has_value());
  CHECK(records[1].gender.value() == "f");

  // duplicate utt_id names its line
  {
    std::ofstream os(path);
    for (int i = 0; i < 6; ++i)
      os << R"({"utt_id":"u)" << i << R"("})" << "\n";
    os << R"({"utt_id":"u2"})" << "\n";  // line 7 duplicates u2
  }
  CHECK_THROWS_WITH_AS(load_manifest(path), doctest::Contains("line 7"),
                       std::runtime_error);

  // unknown label
  {
    std::ofstream os(path);
    os << R"({"utt_id":"u0","age":"toddler"})" << "\n";
  }
  CHECK_THROWS_WITH_AS(load_manifest(path),
                       doctest::Contains("unknown age label"),
                       std::runtime_error);

  // emotion requires a declared set and membership in it
  {
    std::ofstream os(path);
    os << R"({"utt_id":"u0","emotion":"happy"})" << "\n";
  }
  CHECK_THROWS(load_manifest(path));
  {
    std::ofstream os(path);
    os << R"({"utt_id":"u0","emotion":"calm","emotion_set":"basic6"})" << "\n";
  }
  CHECK_THROWS(load_manifest(path));
}

TEST_CASE("manifest save/load round-trip") {
  std::string dir = testutil::scratch_dir("manifest_rt");
  UtteranceRecord rec;
  rec.utt_id = "u0";
  rec.speaker = "spk3";
  rec.emotion = "e2";
  rec.emotion_set = "synth6";
  save_manifest({rec}, dir + "/m.jsonl");
  std::vector<UtteranceRecord> loaded = load_manifest(dir + "/m.jsonl");
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].speaker.value() == "spk3");
  CHECK(loaded[0].emotion.value() == "e2");
  CHECK_FALSE(loaded[0].age.has_value());
}

TEST_CASE("emotion sets and task vocabularies") {
  CHECK(emotion_set_labels("basic6").size() == 6);
  CHECK(emotion_set_labels("basic8").size() == 8);
  CHECK(emotion_set_labels("synth4") ==
        std::vector<std::string>{"e0", "e1", "e2", "e3"});
  CHECK_THROWS(emotion_set_labels("nope"));

  UtteranceRecord a, b;
  a.utt_id = "a";
  a.speaker = "spkB";
  b.utt_id = "b";
  b.speaker = "spkA";
  std::vector<std::string> sid = task_classes({a, b}, Task::kSid);
  CHECK(sid == std::vector<std::string>{"spkA", "spkB"});
  CHECK(task_classes({a, b}, Task::kAge) == kAgeBins);
}
