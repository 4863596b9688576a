// src/archive.cc

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

#include "voiceval/archive.h"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace voiceval {

namespace {

constexpr char kArchiveMagic[4] = {'A', 'U', 'D', 'V'};
constexpr char kBundleMagic[4] = {'A', 'U', 'D', 'H'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u16(std::ostream &os, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff)};
  os.write(reinterpret_cast<const char *>(b), 2);
}

void put_u32(std::ostream &os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char *>(b), 4);
}

void put_u64(std::ostream &os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char *>(b), 8);
}

void put_f32(std::ostream &os, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(os, bits);
}

void read_bytes(std::istream &is, void *dst, std::size_t n,
                const char *what) {
  is.read(reinterpret_cast<char *>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(is.gcount()) != n)
    throw std::runtime_error(std::string("truncated file while reading ") +
                             what);
}

std::uint16_t get_u16(std::istream &is, const char *what) {
  unsigned char b[2];
  read_bytes(is, b, 2, what);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t get_u32(std::istream &is, const char *what) {
  unsigned char b[4];
  read_bytes(is, b, 4, what);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

std::uint64_t get_u64(std::istream &is, const char *what) {
  unsigned char b[8];
  read_bytes(is, b, 8, what);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

float get_f32(std::istream &is, const char *what) {
  std::uint32_t bits = get_u32(is, what);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

std::string get_string16(std::istream &is, const char *what) {
  std::uint16_t len = get_u16(is, what);
  std::string s(len, '\0');
  if (len > 0) read_bytes(is, s.data(), len, what);
  return s;
}

void put_string16(std::ostream &os, const std::string &s) {
  if (s.size() > 0xffff)
    throw std::invalid_argument("string too long for u16 length field");
  put_u16(os, static_cast<std::uint16_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::ofstream open_out(const std::string &path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  return os;
}

std::ifstream open_in(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  return is;
}

void check_magic(std::istream &is, const char expected[4],
                 const std::string &path) {
  char m[4];
  read_bytes(is, m, 4, "magic");
  if (std::memcmp(m, expected, 4) != 0)
    throw std::runtime_error("bad magic in " + path);
}

void check_version(std::istream &is, const std::string &path) {
  std::uint32_t version = get_u32(is, "version");
  if (version != kFormatVersion)
    throw std::runtime_error("version mismatch in " + path + ": got " +
                             std::to_string(version));
}

}  // namespace

void write_archive(const std::vector<FrameEmbeddings> &records,
                   const std::string &path, std::uint32_t dim,
                   float frame_rate_hz) {
  for (const FrameEmbeddings &fe : records) {
    if (fe.dim() != dim)
      throw std::invalid_argument("write_archive: dim mismatch for '" +
                                  fe.utt_id + "'");
    if (fe.valid.size() != fe.num_frames())
      throw std::invalid_argument("write_archive: mask length mismatch for '" +
                                  fe.utt_id + "'");
    if (fe.num_valid() == 0)
      throw std::invalid_argument("write_archive: no valid frames in '" +
                                  fe.utt_id + "'");
    if (!all_finite(fe.frames))
      throw std::invalid_argument("write_archive: non-finite values in '" +
                                  fe.utt_id + "'");
  }

  std::ofstream os = open_out(path);
  os.write(kArchiveMagic, 4);
  put_u32(os, kFormatVersion);
  put_u32(os, dim);
  put_f32(os, frame_rate_hz);
  put_u64(os, records.size());
  for (const FrameEmbeddings &fe : records) {
    put_string16(os, fe.utt_id);
    put_u32(os, static_cast<std::uint32_t>(fe.num_frames()));
    std::size_t n_bytes = (fe.num_frames() + 7) / 8;
    std::vector<unsigned char> mask(n_bytes, 0);
    for (std::size_t t = 0; t < fe.num_frames(); ++t)
      if (fe.valid[t]) mask[t / 8] |= static_cast<unsigned char>(1u << (t % 8));
    os.write(reinterpret_cast<const char *>(mask.data()),
             static_cast<std::streamsize>(mask.size()));
    for (float x : fe.frames.data) put_f32(os, x);
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

void write_archive(const std::vector<FrameEmbeddings> &records,
                   const std::string &path) {
  if (records.empty())
    throw std::invalid_argument(
        "write_archive: dim required for an empty archive");
  write_archive(records, path, static_cast<std::uint32_t>(records[0].dim()),
                records[0].frame_rate_hz);
}

std::vector<FrameEmbeddings> read_archive(const std::string &path) {
  std::ifstream is = open_in(path);
  check_magic(is, kArchiveMagic, path);
  check_version(is, path);
  std::uint32_t dim = get_u32(is, "dim");
  float frame_rate = get_f32(is, "frame_rate");
  std::uint64_t count = get_u64(is, "entry count");

  std::vector<FrameEmbeddings> records;
  records.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    FrameEmbeddings fe;
    fe.utt_id = get_string16(is, "utt_id");
    fe.frame_rate_hz = frame_rate;
    std::uint32_t n_frames = get_u32(is, "frame count");
    std::size_t n_bytes = (static_cast<std::size_t>(n_frames) + 7) / 8;
    std::vector<unsigned char> mask(n_bytes);
    if (n_bytes > 0) read_bytes(is, mask.data(), n_bytes, "mask");
    fe.valid.resize(n_frames);
    for (std::uint32_t t = 0; t < n_frames; ++t)
      fe.valid[t] = (mask[t / 8] >> (t % 8)) & 1u;
    fe.frames = Matrix(n_frames, dim);
    for (float &x : fe.frames.data) x = get_f32(is, "frame data");
    records.push_back(std::move(fe));
  }
  return records;
}

void TensorBundle::set_matrix(const std::string &name, Matrix m) {
  tensors[name] = std::move(m);
}

void TensorBundle::set_vector(const std::string &name, const Vector &v) {
  Matrix m(1, v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) m.at(0, i) = v[i];
  tensors[name] = std::move(m);
}

void TensorBundle::set_scalar(const std::string &name, float value) {
  Matrix m(1, 1);
  m.at(0, 0) = value;
  tensors[name] = std::move(m);
}

const Matrix &TensorBundle::get_matrix(const std::string &name) const {
  auto it = tensors.find(name);
  if (it == tensors.end())
    throw std::runtime_error("bundle tensor not found: " + name);
  return it->second;
}

Vector TensorBundle::get_vector(const std::string &name) const {
  const Matrix &m = get_matrix(name);
  if (m.rows != 1)
    throw std::runtime_error("bundle tensor is not a vector: " + name);
  Vector v(m.cols);
  for (std::size_t i = 0; i < m.cols; ++i) v[i] = m.at(0, i);
  return v;
}

float TensorBundle::get_scalar(const std::string &name) const {
  const Matrix &m = get_matrix(name);
  if (m.rows != 1 || m.cols != 1)
    throw std::runtime_error("bundle tensor is not a scalar: " + name);
  return m.at(0, 0);
}

void write_bundle(const TensorBundle &bundle, const std::string &path) {
  std::ofstream os = open_out(path);
  os.write(kBundleMagic, 4);
  put_u32(os, kFormatVersion);
  put_string16(os, bundle.tag);
  put_u64(os, bundle.tensors.size());
  for (const auto &[name, m] : bundle.tensors) {
    put_string16(os, name);
    put_u32(os, static_cast<std::uint32_t>(m.rows));
    put_u32(os, static_cast<std::uint32_t>(m.cols));
    for (float x : m.data) put_f32(os, x);
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

TensorBundle read_bundle(const std::string &path) {
  std::ifstream is = open_in(path);
  check_magic(is, kBundleMagic, path);
  check_version(is, path);
  TensorBundle bundle;
  bundle.tag = get_string16(is, "tag");
  std::uint64_t count = get_u64(is, "tensor count");
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name = get_string16(is, "tensor name");
    std::uint32_t rows = get_u32(is, "rows");
    std::uint32_t cols = get_u32(is, "cols");
    Matrix m(rows, cols);
    for (float &x : m.data) x = get_f32(is, "tensor data");
    bundle.tensors[name] = std::move(m);
  }
  return bundle;
}

}  // namespace voiceval
