// Copyright 2026 The Emorig Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "emorig/checkpoint.h"

#include <cstring>
#include <fstream>

namespace emorig::ckpt {

namespace {

constexpr char kMagic[8] = {'E', 'R', 'I', 'G', 'C', 'K', 'P', 'T'};

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const std::string& path) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError(path + ": truncated checkpoint");
  return v;
}

}  // namespace

void save(const std::string& path, const std::string& meta_json,
          const nn::ParamRefs<real>& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kFormatVersion);
  write_pod(out, static_cast<std::uint64_t>(meta_json.size()));
  out.write(meta_json.data(), static_cast<std::streamsize>(meta_json.size()));
  write_pod(out, static_cast<std::uint32_t>(params.size()));
  for (const auto* p : params) {
    write_pod(out, static_cast<std::uint16_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    write_pod(out, static_cast<std::uint8_t>(sizeof(real)));
    write_pod(out, static_cast<std::uint64_t>(p->value.rows()));
    write_pod(out, static_cast<std::uint64_t>(p->value.cols()));
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(sizeof(real) * p->value.size()));
  }
  if (!out) throw IoError("write failed: " + path);
}

Loaded load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IoError(path + ": not a checkpoint archive");
  const auto version = read_pod<std::uint32_t>(in, path);
  if (version != kFormatVersion)
    throw IoError(path + ": unsupported checkpoint version " +
                  std::to_string(version));
  Loaded archive;
  const auto meta_len = read_pod<std::uint64_t>(in, path);
  archive.meta_json.resize(meta_len);
  in.read(archive.meta_json.data(), static_cast<std::streamsize>(meta_len));
  const auto count = read_pod<std::uint32_t>(in, path);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = read_pod<std::uint16_t>(in, path);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const auto dtype = read_pod<std::uint8_t>(in, path);
    if (dtype != sizeof(real))
      throw IoError(path + ": scalar width mismatch for tensor " + name);
    const auto rows = read_pod<std::uint64_t>(in, path);
    const auto cols = read_pod<std::uint64_t>(in, path);
    nn::MatT<real> m(static_cast<Eigen::Index>(rows),
                     static_cast<Eigen::Index>(cols));
    in.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(sizeof(real) * m.size()));
    if (!in) throw IoError(path + ": truncated checkpoint");
    archive.tensors.emplace_back(std::move(name), std::move(m));
  }
  return archive;
}

const nn::MatT<real>& Loaded::tensor(const std::string& name) const {
  for (const auto& [n, m] : tensors)
    if (n == name) return m;
  throw IoError("checkpoint has no tensor named " + name);
}

void restore(const Loaded& archive, const nn::ParamRefs<real>& params) {
  for (auto* p : params) {
    const auto& m = archive.tensor(p->name);
    if (m.rows() != p->value.rows() || m.cols() != p->value.cols())
      throw IoError("checkpoint tensor " + p->name + " has shape " +
                    std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                    ", expected " + std::to_string(p->value.rows()) + "x" +
                    std::to_string(p->value.cols()));
    p->value = m;
  }
}

std::uint64_t file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for hashing: " + path);
  std::uint64_t h = 1469598103934665603ull;
  char buf[65536];
  while (in) {
    in.read(buf, sizeof(buf));
    h = fnv1a(buf, static_cast<std::size_t>(in.gcount()), h);
  }
  return h;
}

}  // namespace emorig::ckpt
