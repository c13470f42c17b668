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

#include "emorig/rig.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

namespace emorig::rig {

void RigSequence::validate() const {
  if (values.rows() < 1)
    throw ValidationError("rig sequence must have at least one frame");
  if (values.cols() < 1)
    throw ValidationError("rig sequence must have at least one controller");
  if (fps <= 0) throw ValidationError("rig fps must be positive");
  if (!values.allFinite())
    throw ValidationError("rig sequence contains non-finite values");
}

namespace {

void validate_set(const std::vector<int>& set, const char* name, int dims) {
  if (set.empty())
    throw ValidationError(std::string("controller set '") + name +
                          "' must not be empty");
  for (int idx : set) {
    if (idx < 0 || idx >= dims)
      throw ValidationError(std::string("controller set '") + name +
                            "' has out-of-range index " + std::to_string(idx) +
                            " (dims=" + std::to_string(dims) + ")");
  }
}

std::vector<int> index_range(int lo, int hi) {
  std::vector<int> v(hi - lo);
  std::iota(v.begin(), v.end(), lo);
  return v;
}

}  // namespace

void ControllerSets::validate(int controller_count) const {
  validate_set(lip, "lip", controller_count);
  validate_set(emo, "emo", controller_count);
  validate_set(up, "up", controller_count);
  validate_set(intensity, "int", controller_count);
}

ControllerSets ControllerSets::defaults(int controller_count) {
  if (controller_count < 91)
    throw ValidationError("default controller sets need at least 91 controllers");
  ControllerSets s;
  s.lip = index_range(0, 60);
  s.emo = index_range(60, controller_count);
  s.up = s.emo;
  s.intensity = index_range(60, 90);
  return s;
}

IntensityCurve pseudo_intensity(const RigSequence& r,
                                const std::vector<int>& intensity_set) {
  validate_set(intensity_set, "int", static_cast<int>(r.controllers()));
  IntensityCurve curve;
  curve.fps = r.fps;
  curve.values.setZero(r.frames());
  for (Eigen::Index t = 0; t < r.frames(); ++t) {
    double acc = 0.0;
    for (int j : intensity_set) acc += std::abs(r.values(t, j));
    curve.values(t) = acc;
  }
  return curve;
}

IntensityCurve pseudo_intensity(const RigSequence& r, const ControllerSets& sets) {
  return pseudo_intensity(r, sets.intensity);
}

RigSequence slice_controllers(const RigSequence& r, const std::vector<int>& set) {
  validate_set(set, "slice", static_cast<int>(r.controllers()));
  RigSequence out;
  out.fps = r.fps;
  out.values.resize(r.frames(), static_cast<Eigen::Index>(set.size()));
  for (std::size_t j = 0; j < set.size(); ++j)
    out.values.col(static_cast<Eigen::Index>(j)) = r.values.col(set[j]);
  return out;
}

namespace {

struct Header {
  int fps = 0;
  int dims = 0;
};

Header parse_header(const std::string& line, const std::string& path) {
  Header h;
  if (std::sscanf(line.c_str(), "fps=%d dims=%d", &h.fps, &h.dims) != 2)
    throw IoError(path + ": missing header (expected 'fps=<int> dims=<int>')");
  if (h.fps <= 0 || h.dims <= 0)
    throw IoError(path + ": header fields must be positive");
  return h;
}

Eigen::MatrixXd read_matrix_body(std::istream& in, int dims,
                                 const std::string& path) {
  std::vector<double> data;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++row;
    std::istringstream ls(line);
    int count = 0;
    double v;
    while (ls >> v) {
      if (!std::isfinite(v))
        throw IoError(path + ": non-finite value at row " + std::to_string(row));
      data.push_back(v);
      ++count;
    }
    if (!ls.eof()) {
      std::string tok;
      std::istringstream probe(line);
      // Re-scan to report the bad token.
      while (probe >> tok) {
        char* end = nullptr;
        std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() || *end != '\0')
          throw IoError(path + ": unparseable value '" + tok + "' at row " +
                        std::to_string(row));
      }
    }
    if (count != dims)
      throw IoError(path + ": row " + std::to_string(row) + " has " +
                    std::to_string(count) + " values, expected " +
                    std::to_string(dims));
  }
  if (row == 0) throw IoError(path + ": no data rows");
  Eigen::MatrixXd m(row, dims);
  for (int r = 0; r < row; ++r)
    for (int c = 0; c < dims; ++c) m(r, c) = data[static_cast<std::size_t>(r) * dims + c];
  return m;
}

void write_matrix(const Eigen::MatrixXd& m, int fps, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "fps=" << fps << " dims=" << m.cols() << "\n";
  char buf[40];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.9g", m(r, c));
      out << buf << (c + 1 == m.cols() ? "" : " ");
    }
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace

RigSequence read_rig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open rig file: " + path);
  std::string first;
  if (!std::getline(in, first))
    throw IoError(path + ": missing header (empty file)");
  Header h = parse_header(first, path);
  RigSequence r;
  r.fps = h.fps;
  r.values = read_matrix_body(in, h.dims, path);
  r.validate();
  return r;
}

void write_rig(const RigSequence& r, const std::string& path) {
  r.validate();
  write_matrix(r.values, r.fps, path);
}

FeatureStream read_features(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open feature file: " + path);
  std::string first;
  if (!std::getline(in, first))
    throw IoError(path + ": missing header (empty file)");
  Header h = parse_header(first, path);
  FeatureStream fs;
  fs.fps = h.fps;
  fs.values = read_matrix_body(in, h.dims, path);
  return fs;
}

void write_features(const FeatureStream& fs, const std::string& path) {
  write_matrix(fs.values, fs.fps, path);
}

Eigen::VectorXd read_vector(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vector file: " + path);
  std::string first;
  if (!std::getline(in, first))
    throw IoError(path + ": missing header (empty file)");
  int dims = 0;
  if (std::sscanf(first.c_str(), "dims=%d", &dims) != 1 || dims <= 0)
    throw IoError(path + ": missing header (expected 'dims=<k>')");
  Eigen::VectorXd v(dims);
  for (int i = 0; i < dims; ++i) {
    if (!(in >> v(i)))
      throw IoError(path + ": expected " + std::to_string(dims) + " values");
    if (!std::isfinite(v(i)))
      throw IoError(path + ": non-finite value at index " + std::to_string(i));
  }
  return v;
}

void write_vector(const Eigen::VectorXd& v, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "dims=" << v.size() << "\n";
  char buf[40];
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.9g", v(i));
    out << buf << (i + 1 == v.size() ? "" : " ");
  }
  out << "\n";
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace emorig::rig
