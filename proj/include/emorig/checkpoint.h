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

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "emorig/layers.h"

namespace emorig::ckpt {

inline constexpr std::uint32_t kFormatVersion = 1;

// Binary parameter archive with a JSON metadata record. Loaders reject
// unknown format versions.
void save(const std::string& path, const std::string& meta_json,
          const nn::ParamRefs<real>& params);

struct Loaded {
  std::string meta_json;
  std::vector<std::pair<std::string, nn::MatT<real>>> tensors;

  const nn::MatT<real>& tensor(const std::string& name) const;
};

Loaded load(const std::string& path);

// Restores parameter values by name; every target must be present with a
// matching shape.
void restore(const Loaded& archive, const nn::ParamRefs<real>& params);

// Content hash of an archive on disk.
std::uint64_t file_hash(const std::string& path);

}  // namespace emorig::ckpt
