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

#include <cmath>

#include "emorig/layers.h"

namespace emorig::nn {

// Step decay: lr(epoch) = base * decay^floor(epoch / step_size).
struct StepLr {
  double base_lr = 1e-3;
  double decay = 0.9;
  int step_size = 10;

  double at(int epoch) const {
    return base_lr * std::pow(decay, epoch / step_size);
  }
};

template <typename S>
class Adam {
 public:
  explicit Adam(ParamRefs<S> params, double weight_decay = 0.0,
                double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : params_(std::move(params)),
        weight_decay_(weight_decay),
        beta1_(beta1),
        beta2_(beta2),
        eps_(eps) {}

  // Applies one update from the accumulated gradients, scaled by
  // grad_scale (1/batch for mean-of-sample losses), then clears them.
  void step(double lr, double grad_scale = 1.0) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (auto* p : params_) {
      if (p->frozen)
        throw ValidationError("attempt to update frozen parameter " + p->name);
      if (p->grad.size() == 0) continue;
      if (p->adam_m.size() == 0) {
        p->adam_m.setZero(p->value.rows(), p->value.cols());
        p->adam_v.setZero(p->value.rows(), p->value.cols());
      }
      MatT<S> g = p->grad * static_cast<S>(grad_scale);
      p->adam_m = static_cast<S>(beta1_) * p->adam_m + static_cast<S>(1.0 - beta1_) * g;
      p->adam_v = static_cast<S>(beta2_) * p->adam_v +
                  static_cast<S>(1.0 - beta2_) * g.cwiseProduct(g);
      MatT<S> mhat = p->adam_m / static_cast<S>(bc1);
      MatT<S> vhat = p->adam_v / static_cast<S>(bc2);
      p->value -= (static_cast<S>(lr) * mhat.array() /
                   (vhat.array().sqrt() + static_cast<S>(eps_)))
                      .matrix();
      // Decoupled per-step weight decay; pathways the loss no longer uses
      // fade instead of parking stale information in the latents.
      if (weight_decay_ != 0.0)
        p->value *= static_cast<S>(1.0 - weight_decay_);
      p->grad.setZero();
    }
  }

  void zero_grad() {
    for (auto* p : params_) p->zero_grad();
  }

 private:
  ParamRefs<S> params_;
  double weight_decay_;
  double beta1_, beta2_, eps_;
  long t_ = 0;
};

}  // namespace emorig::nn
