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
#include <vector>

#include "emorig/rig.h"

namespace emorig::metrics {

// Mean L1 error over frames and lip controllers.
double mle(const rig::RigSequence& pred, const rig::RigSequence& gt,
           const rig::ControllerSets& sets);

// Mean L1 error over frames and emotion controllers.
double mee(const rig::RigSequence& pred, const rig::RigSequence& gt,
           const rig::ControllerSets& sets);

// Mean L1 error between per-frame pseudo-intensities.
double eie(const rig::RigSequence& pred, const rig::RigSequence& gt,
           const rig::ControllerSets& sets);

// Mean over upper-face controllers of std(gt) - std(pred), population std.
// Signed as defined; set absolute=true for the magnitude variant.
double frd(const rig::RigSequence& pred, const rig::RigSequence& gt,
           const rig::ControllerSets& sets, bool absolute = false);

struct ClipMetrics {
  std::string clip;
  double mle = 0, mee = 0, eie = 0, frd = 0;
};

struct EvalReport {
  double mle = 0, mee = 0, eie = 0, frd = 0;
  std::vector<ClipMetrics> per_clip;
  std::vector<std::string> errors;  // clips skipped and why
  rig::ControllerSets sets;

  std::string to_csv() const;    // per-clip rows
  std::string to_table() const;  // aligned aggregate table, MLE MEE EIE FRD
};

EvalReport aggregate(std::vector<ClipMetrics> per_clip,
                     const rig::ControllerSets& sets);

// Evaluates every *.rig clip present in gt_dir against its same-named
// counterpart in pred_dir. Missing counterparts are recorded in
// report.errors and skipped.
EvalReport evaluate_corpus(const std::string& pred_dir,
                           const std::string& gt_dir,
                           const rig::ControllerSets& sets);

}  // namespace emorig::metrics
