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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "emorig/rig.h"

namespace emorig::synth {

inline constexpr int kEmotionCount = 7;
inline const std::array<std::string, kEmotionCount> kEmotionNames = {
    "neutral", "happy", "angry", "sad", "surprised", "fearful", "disgusted"};

int emotion_index(const std::string& name);  // throws ValidationError

struct SynthSpec {
  int n_contents = 64;
  int seq_len = 120;
  int dims = rig::kDefaultControllerCount;
  int fps = 30;
  std::uint64_t seed = 7;
  int content_dim = 8;
  double emotion_gain = 1.0;
  // Fraction of content written into non-lip columns (and emotion into lip
  // columns). Zero overlap would make disentanglement trivial.
  double leak = 0.05;
  int audio_width = 16;
  int text_width = 10;
  int guidance_text_width = 48;
  int guidance_image_width = 40;
  double feature_noise = 0.02;
  double guidance_noise = 0.05;
  rig::ControllerSets sets = rig::ControllerSets::defaults();

  void validate() const;
};

// One generated clip. Samples sharing content_id have identical content
// contributions frame by frame; samples sharing emotion_id share the
// emotion direction and generative intensity curve.
struct SynthSample {
  rig::RigSequence rig_seq;
  int content_id = 0;
  int emotion_id = 0;
  rig::IntensityCurve true_intensity;   // pseudo-intensity of rig_seq
  rig::FeatureStream audio_features;    // prosody magnitude + content view
  rig::FeatureStream text_features;     // emotion identity + word timing
  Eigen::VectorXd guidance_text;        // noisy linear image of the one-hot
  Eigen::VectorXd guidance_image;
};

// Exact generative factors behind one sample:
//   rig = content_contribution + gen_intensity (x) emotion_direction + bias.
struct SynthFactors {
  Eigen::MatrixXd content_contribution;  // T x D
  Eigen::VectorXd emotion_direction;     // D, includes emotion_gain
  Eigen::VectorXd gen_intensity;         // T, the generative curve
  Eigen::VectorXd bias;                  // D
  Eigen::VectorXd true_intensity;        // T, equals Eq.-(8) pseudo-intensity

  Eigen::MatrixXd reconstruct() const;
};

class SynthDataset {
 public:
  SynthSpec spec;
  std::vector<SynthSample> samples;  // n_contents * 7, grouped by content

  const SynthSample& sample(int content_id, int emotion_id) const;
  SynthFactors factorization(const SynthSample& s) const;

  // Generator state, exposed for oracle checks.
  Eigen::MatrixXd content_mixer;                    // D x content_dim
  std::vector<Eigen::MatrixXd> content_trajectories;  // per content, T x cdim
  std::vector<Eigen::VectorXd> emotion_directions;    // per emotion, D
  std::vector<Eigen::VectorXd> intensity_curves;      // per emotion, T
  std::vector<Eigen::VectorXd> prosody_curves;        // per emotion, T
  std::vector<Eigen::VectorXd> word_curves;           // per emotion, T
  Eigen::VectorXd bias;                               // D
};

SynthDataset generate_dataset(const SynthSpec& spec);

SynthFactors oracle_factorization(const SynthDataset& ds, const SynthSample& s);

// On-disk dataset: rig clips, feature streams, guidance vectors, plus a
// JSON manifest binding them together.
struct LoadedSample {
  int content_id = 0;
  int emotion_id = 0;
  rig::RigSequence rig_seq;
  rig::IntensityCurve true_intensity;
  rig::FeatureStream audio_features;
  rig::FeatureStream text_features;
  Eigen::VectorXd guidance_text;
  Eigen::VectorXd guidance_image;
};

struct LoadedDataset {
  int fps = 30;
  int dims = rig::kDefaultControllerCount;
  int n_contents = 0;
  std::vector<LoadedSample> samples;
};

void save_dataset(const SynthDataset& ds, const std::string& dir);
LoadedDataset load_dataset(const std::string& dir);

LoadedDataset to_loaded(const SynthDataset& ds);  // in-memory conversion

}  // namespace emorig::synth
