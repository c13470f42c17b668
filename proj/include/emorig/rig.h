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

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "emorig/common.h"

namespace emorig::rig {

inline constexpr int kDefaultControllerCount = 174;

// A facial animation clip: T frames of D controller activations at a fixed
// frame rate. Values are nominally in [0, 1] but never clamped.
struct RigSequence {
  Eigen::MatrixXd values;  // T x D
  int fps = 30;

  Eigen::Index frames() const { return values.rows(); }
  Eigen::Index controllers() const { return values.cols(); }

  void validate() const;
};

// Named controller index subsets used by losses, metrics, and intensity.
struct ControllerSets {
  std::vector<int> lip;
  std::vector<int> emo;
  std::vector<int> up;
  std::vector<int> intensity;

  void validate(int controller_count) const;

  // Default partition for synthetic data: lip [0,60), emo = up [60,174),
  // intensity [60,90). Overridable via config.
  static ControllerSets defaults(int controller_count = kDefaultControllerCount);
};

// Per-frame nonnegative intensity values.
struct IntensityCurve {
  Eigen::VectorXd values;
  int fps = 30;
};

// Per-frame L1 norm of the selected controllers.
IntensityCurve pseudo_intensity(const RigSequence& rig,
                                const ControllerSets& sets);
IntensityCurve pseudo_intensity(const RigSequence& rig,
                                const std::vector<int>& intensity_set);

RigSequence slice_controllers(const RigSequence& rig,
                              const std::vector<int>& set);

// Text format: first line "fps=<int> dims=<int>", then one row of dims
// floats per frame.
RigSequence read_rig(const std::string& path);
void write_rig(const RigSequence& rig, const std::string& path);

// Frame-aligned feature stream produced by an adapter; shares the rig text
// format so both sides of the pipeline use one parser.
struct FeatureStream {
  Eigen::MatrixXd values;  // T' x k
  int fps = 30;

  Eigen::Index frames() const { return values.rows(); }
  Eigen::Index width() const { return values.cols(); }
};

FeatureStream read_features(const std::string& path);
void write_features(const FeatureStream& fs, const std::string& path);

// Flat guidance vector with a width header ("dims=<k>" then k floats).
Eigen::VectorXd read_vector(const std::string& path);
void write_vector(const Eigen::VectorXd& v, const std::string& path);

}  // namespace emorig::rig
