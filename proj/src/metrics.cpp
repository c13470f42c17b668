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

#include "emorig/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

namespace emorig::metrics {

namespace {

void check_shapes(const rig::RigSequence& pred, const rig::RigSequence& gt) {
  if (pred.frames() != gt.frames() || pred.controllers() != gt.controllers())
    throw ValidationError(
        "metric inputs must have equal shape: pred " +
        std::to_string(pred.frames()) + "x" + std::to_string(pred.controllers()) +
        " vs gt " + std::to_string(gt.frames()) + "x" +
        std::to_string(gt.controllers()));
}

double region_l1(const rig::RigSequence& pred, const rig::RigSequence& gt,
                 const std::vector<int>& set) {
  check_shapes(pred, gt);
  double acc = 0.0;
  for (Eigen::Index t = 0; t < pred.frames(); ++t)
    for (int j : set) acc += std::abs(pred.values(t, j) - gt.values(t, j));
  return acc / (static_cast<double>(pred.frames()) * static_cast<double>(set.size()));
}

double population_std(const Eigen::VectorXd& col) {
  const double mean = col.mean();
  return std::sqrt((col.array() - mean).square().sum() / col.size());
}

}  // namespace

double mle(const rig::RigSequence& pred, const rig::RigSequence& gt,
           const rig::ControllerSets& sets) {
  return region_l1(pred, gt, sets.lip);
}

double mee(const rig::RigSequence& pred, const rig::RigSequence& gt,
           const rig::ControllerSets& sets) {
  return region_l1(pred, gt, sets.emo);
}

double eie(const rig::RigSequence& pred, const rig::RigSequence& gt,
           const rig::ControllerSets& sets) {
  check_shapes(pred, gt);
  auto ip = rig::pseudo_intensity(pred, sets);
  auto ig = rig::pseudo_intensity(gt, sets);
  return (ip.values - ig.values).cwiseAbs().mean();
}

double frd(const rig::RigSequence& pred, const rig::RigSequence& gt,
           const rig::ControllerSets& sets, bool absolute) {
  check_shapes(pred, gt);
  if (pred.frames() < 2)
    throw ValidationError("frd requires at least two frames");
  double acc = 0.0;
  for (int j : sets.up)
    acc += population_std(gt.values.col(j)) - population_std(pred.values.col(j));
  double v = acc / static_cast<double>(sets.up.size());
  return absolute ? std::abs(v) : v;
}

EvalReport aggregate(std::vector<ClipMetrics> per_clip,
                     const rig::ControllerSets& sets) {
  EvalReport r;
  r.sets = sets;
  r.per_clip = std::move(per_clip);
  if (r.per_clip.empty()) return r;
  for (const auto& c : r.per_clip) {
    r.mle += c.mle;
    r.mee += c.mee;
    r.eie += c.eie;
    r.frd += c.frd;
  }
  const auto n = static_cast<double>(r.per_clip.size());
  r.mle /= n;
  r.mee /= n;
  r.eie /= n;
  r.frd /= n;
  return r;
}

std::string EvalReport::to_csv() const {
  std::ostringstream out;
  out << "clip,mle,mee,eie,frd\n";
  char buf[160];
  for (const auto& c : per_clip) {
    std::snprintf(buf, sizeof(buf), "%s,%.9g,%.9g,%.9g,%.9g\n", c.clip.c_str(),
                  c.mle, c.mee, c.eie, c.frd);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), "aggregate,%.9g,%.9g,%.9g,%.9g\n", mle, mee,
                eie, frd);
  out << buf;
  return out.str();
}

std::string EvalReport::to_table() const {
  std::ostringstream out;
  char buf[160];
  out << "clips      MLE          MEE          EIE          FRD\n";
  std::snprintf(buf, sizeof(buf), "%-10zu %-12.6g %-12.6g %-12.6g %-12.6g\n",
                per_clip.size(), mle, mee, eie, frd);
  out << buf;
  if (!errors.empty()) {
    out << "errors:\n";
    for (const auto& e : errors) out << "  " << e << "\n";
  }
  return out.str();
}

EvalReport evaluate_corpus(const std::string& pred_dir,
                           const std::string& gt_dir,
                           const rig::ControllerSets& sets) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(gt_dir)) throw IoError("not a directory: " + gt_dir);
  if (!fs::is_directory(pred_dir)) throw IoError("not a directory: " + pred_dir);

  std::vector<std::string> clips;
  for (const auto& e : fs::directory_iterator(gt_dir)) {
    if (e.path().extension() == ".rig") clips.push_back(e.path().filename().string());
  }
  std::sort(clips.begin(), clips.end());

  std::vector<ClipMetrics> rows;
  std::vector<std::string> errors;
  for (const auto& name : clips) {
    const auto pred_path = fs::path(pred_dir) / name;
    if (!fs::exists(pred_path)) {
      errors.push_back(name + ": missing prediction");
      continue;
    }
    try {
      auto gt = rig::read_rig((fs::path(gt_dir) / name).string());
      auto pred = rig::read_rig(pred_path.string());
      ClipMetrics c;
      c.clip = name;
      c.mle = mle(pred, gt, sets);
      c.mee = mee(pred, gt, sets);
      c.eie = eie(pred, gt, sets);
      c.frd = frd(pred, gt, sets);
      rows.push_back(std::move(c));
    } catch (const std::exception& ex) {
      errors.push_back(name + ": " + ex.what());
    }
  }
  auto report = aggregate(std::move(rows), sets);
  report.errors = std::move(errors);
  return report;
}

}  // namespace emorig::metrics
