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

#include <utility>

#include "emorig/config.h"
#include "emorig/models.h"
#include "emorig/synth.h"

namespace emorig::disentangle {

enum class EmbeddingKind { content, emotion };

// Per-frame latent sequence aligned with its source rig clip.
struct EmbeddingSequence {
  Eigen::MatrixXd values;  // T x d
  EmbeddingKind kind = EmbeddingKind::content;
};

// The stage-1 artifact: emotion encoder, content encoder, and decoder.
// After training it is frozen and anchors the latent space for every
// later stage.
class AutoencoderBundle {
 public:
  AutoencoderBundle() = default;

  static AutoencoderBundle init(int dims, const config::ModelWidths& widths,
                                std::uint64_t seed);

  // Returns (content, emotion) embeddings, one row per frame.
  std::pair<EmbeddingSequence, EmbeddingSequence> encode(
      const rig::RigSequence& rig_seq) const;

  rig::RigSequence decode(const EmbeddingSequence& content,
                          const EmbeddingSequence& emotion, int fps) const;

  // Decodes (content_a, emotion_b) and (content_b, emotion_a). Requires a
  // frozen bundle and per-frame alignment of the two clips.
  std::pair<rig::RigSequence, rig::RigSequence> swap_emotion(
      const rig::RigSequence& a, const rig::RigSequence& b) const;

  void freeze();
  bool frozen() const;
  std::uint64_t checksum() const;
  int dims() const { return net_.dims; }

  model::MotionAutoencoder<real>& net() { return net_; }
  const model::MotionAutoencoder<real>& net() const { return net_; }

 private:
  // Tape construction reads parameters through non-const references; a
  // frozen net is never written, so inference stays const and reentrant.
  mutable model::MotionAutoencoder<real> net_;
};

struct PhaseLogEntry {
  std::string phase;  // "self" | "overlap" | "cycle"
  int epochs = 0;
  double final_loss = 0.0;
};

struct Stage1Options {
  bool use_overlap = true;
  bool use_cycle = true;
};

struct Stage1Result {
  AutoencoderBundle bundle;  // frozen
  std::vector<PhaseLogEntry> phase_log;
};

// Runs the three exchange phases in order on aligned same-content groups
// and freezes the result. Throws ValidationError when the dataset carries
// no aligned groups.
Stage1Result train_stage1(const std::vector<synth::LoadedSample>& samples,
                          const config::RunConfig& cfg,
                          const Stage1Options& options = {});

// Stage 1 is supervised by reconstruction alone.
std::vector<std::string> stage1_loss_terms();

}  // namespace emorig::disentangle
