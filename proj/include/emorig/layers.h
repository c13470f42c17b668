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

#include <random>
#include <string>
#include <vector>

#include "emorig/tape.h"

namespace emorig::nn {

template <typename S>
using ParamRefs = std::vector<Parameter<S>*>;

// Glorot-uniform init; the RNG is owned by the caller so parameter order
// fully determines the draw sequence.
template <typename S>
void glorot_init(Parameter<S>& p, int rows, int cols, std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-a, a);
  p.value.resize(rows, cols);
  for (Eigen::Index c = 0; c < p.value.cols(); ++c)
    for (Eigen::Index r = 0; r < p.value.rows(); ++r)
      p.value(r, c) = static_cast<S>(dist(rng));
}

template <typename S>
struct Linear {
  Parameter<S> weight;  // in x out
  Parameter<S> bias;    // 1 x out

  Linear() = default;
  Linear(const std::string& name, int in, int out, std::mt19937_64& rng) {
    weight.name = name + ".weight";
    bias.name = name + ".bias";
    glorot_init(weight, in, out, rng);
    bias.value = MatT<S>::Zero(1, out);
  }

  Var<S> forward(Tape<S>& t, Var<S> x) {
    return add_rowvec(t, matmul(t, x, t.param(weight)), t.param(bias));
  }

  void params(ParamRefs<S>& out) {
    out.push_back(&weight);
    out.push_back(&bias);
  }
};

// Temporal convolution along the time axis (rows), kernel size fixed,
// zero padded to preserve length. Expressed as shifted matmuls so the
// backward pass comes for free from the tape.
template <typename S>
struct TemporalConv {
  static constexpr int kKernel = 5;
  std::vector<Parameter<S>> taps;  // kKernel matrices, in x out
  Parameter<S> bias;

  TemporalConv() = default;
  TemporalConv(const std::string& name, int in, int out, std::mt19937_64& rng) {
    taps.resize(kKernel);
    for (int k = 0; k < kKernel; ++k) {
      taps[k].name = name + ".tap" + std::to_string(k);
      glorot_init(taps[k], in, out, rng);
      // Spread the fan across taps so the output variance matches a
      // single dense layer.
      taps[k].value /= std::sqrt(static_cast<S>(kKernel));
    }
    bias.name = name + ".bias";
    bias.value = MatT<S>::Zero(1, out);
  }

  Var<S> forward(Tape<S>& t, Var<S> x) {
    Var<S> acc;
    for (int k = 0; k < kKernel; ++k) {
      int offset = k - kKernel / 2;
      Var<S> term = matmul(t, shift_rows(t, x, offset), t.param(taps[k]));
      acc = (k == 0) ? term : add(t, acc, term);
    }
    return add_rowvec(t, acc, t.param(bias));
  }

  void params(ParamRefs<S>& out) {
    for (auto& p : taps) out.push_back(&p);
    out.push_back(&bias);
  }
};

template <typename S>
void freeze_params(const ParamRefs<S>& ps) {
  for (auto* p : ps) p->frozen = true;
}

template <typename S>
std::uint64_t checksum_params(const ParamRefs<S>& ps) {
  std::uint64_t h = 1469598103934665603ull;
  for (const auto* p : ps) {
    h = fnv1a(p->name, h);
    h = fnv1a(p->value.data(), sizeof(S) * p->value.size(), h);
  }
  return h;
}

// Sinusoidal positional encoding, T x dim. Constant w.r.t. training.
template <typename S>
MatT<S> positional_encoding(int T, int dim) {
  MatT<S> pe(T, dim);
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < dim; ++i) {
      double rate = std::pow(10000.0, -2.0 * (i / 2) / dim);
      double v = t * rate;
      pe(t, i) = static_cast<S>((i % 2 == 0) ? std::sin(v) : std::cos(v));
    }
  }
  return pe;
}

}  // namespace emorig::nn
