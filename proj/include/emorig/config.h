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

#include "emorig/synth.h"

namespace emorig::config {

// Stage-1 (cross-reconstruction) schedule. Three phases run in order.
struct Stage1Schedule {
  double learning_rate = 1e-4;
  double decay = 0.995;
  int step_size = 10;
  double weight_decay = 2e-4;
  int epochs_self = 50;
  int epochs_overlap = 50;
  int epochs_cycle = 50;
  int batch_size = 8;
};

// Schedule for stages 2-4.
struct StageSchedule {
  double learning_rate = 1e-3;
  double decay = 0.9;
  int step_size = 10;
  double weight_decay = 0.0;
  int epochs = 30;
  int batch_size = 8;
};

struct ModelWidths {
  int latent_content = 64;
  int latent_emotion = 64;
  int hidden = 96;
  int acm_width = 256;
  int cmf_dim = 64;
  int pe_dim = 16;
  int label_dim = 64;
  int fusion_hidden = 96;
  int head_hidden = 128;
};

struct RunConfig {
  std::uint64_t seed = 7;
  synth::SynthSpec synth;
  ModelWidths model;
  Stage1Schedule stage1;
  StageSchedule stage2;
  StageSchedule stage3;
  StageSchedule stage4;
  double lambda_sim = 0.1;
  double lambda_int = 0.1;
  double lambda_int_direct = 0.0;
  // Contents reserved for held-out evaluation (taken from the top ids).
  int holdout_contents = 8;
  std::string ablation = "none";

  const rig::ControllerSets& sets() const { return synth.sets; }
  void validate() const;
};

// Loads a JSON config, fills defaults for missing keys, then applies
// environment overrides. Variables are named EMORIG_<path> with path
// segments joined by double underscores, e.g.
//   EMORIG_train__stage1__epochs_self=5
RunConfig load_config(const std::string& path);
RunConfig default_config();

// Parses from a JSON string (used by load_config and the tests).
RunConfig parse_config(const std::string& json_text, bool apply_env = true);

std::string to_json(const RunConfig& cfg);

}  // namespace emorig::config
