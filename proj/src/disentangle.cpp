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

#include "emorig/disentangle.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <random>

namespace emorig::disentangle {

using nn::MatT;
using nn::Tape;
using MatR = MatT<real>;

namespace {

MatR to_real(const Eigen::MatrixXd& m) { return m.cast<real>(); }

Eigen::MatrixXd to_double(const MatR& m) { return m.cast<double>(); }

}  // namespace

AutoencoderBundle AutoencoderBundle::init(int dims,
                                          const config::ModelWidths& widths,
                                          std::uint64_t seed) {
  AutoencoderBundle b;
  std::mt19937_64 rng(seed ^ 0xd15e7a9617e5ull);
  b.net_ = model::MotionAutoencoder<real>::init(
      dims, widths.hidden, widths.latent_content, widths.latent_emotion, rng);
  return b;
}

std::pair<EmbeddingSequence, EmbeddingSequence> AutoencoderBundle::encode(
    const rig::RigSequence& rig_seq) const {
  rig_seq.validate();
  if (rig_seq.controllers() != net_.dims)
    throw ValidationError("encode: rig has " +
                          std::to_string(rig_seq.controllers()) +
                          " controllers, bundle expects " +
                          std::to_string(net_.dims));
  Tape<real> t;
  auto x = t.constant(to_real(rig_seq.values));
  auto c = net_.encode_content(t, x);
  auto e = net_.encode_emotion(t, x);
  EmbeddingSequence content{to_double(t.val(c)), EmbeddingKind::content};
  EmbeddingSequence emotion{to_double(t.val(e)), EmbeddingKind::emotion};
  return {std::move(content), std::move(emotion)};
}

rig::RigSequence AutoencoderBundle::decode(const EmbeddingSequence& content,
                                           const EmbeddingSequence& emotion,
                                           int fps) const {
  if (content.kind != EmbeddingKind::content ||
      emotion.kind != EmbeddingKind::emotion)
    throw ValidationError("decode: embedding kinds are swapped");
  if (content.values.rows() != emotion.values.rows())
    throw ValidationError("decode: content has " +
                          std::to_string(content.values.rows()) +
                          " frames, emotion has " +
                          std::to_string(emotion.values.rows()));
  if (content.values.cols() != net_.latent_content ||
      emotion.values.cols() != net_.latent_emotion)
    throw ValidationError("decode: embedding width mismatch");
  Tape<real> t;
  auto out = net_.decode(t, t.constant(to_real(emotion.values)),
                         t.constant(to_real(content.values)));
  rig::RigSequence r;
  r.fps = fps;
  r.values = to_double(t.val(out));
  r.validate();
  return r;
}

std::pair<rig::RigSequence, rig::RigSequence> AutoencoderBundle::swap_emotion(
    const rig::RigSequence& a, const rig::RigSequence& b) const {
  if (!frozen())
    throw ValidationError("swap_emotion requires a frozen bundle");
  if (a.frames() != b.frames())
    throw ValidationError("swap_emotion: clips must have equal length");
  auto [ca, ea] = encode(a);
  auto [cb, eb] = encode(b);
  return {decode(ca, eb, a.fps), decode(cb, ea, b.fps)};
}

void AutoencoderBundle::freeze() { net_.freeze(); }
bool AutoencoderBundle::frozen() const { return net_.frozen(); }
std::uint64_t AutoencoderBundle::checksum() const { return net_.checksum(); }

std::vector<std::string> stage1_loss_terms() { return {"recon"}; }

// ---------------------------------------------------------------------------
// Stage-1 trainer.
// ---------------------------------------------------------------------------

namespace {

struct GridIndex {
  std::vector<int> contents;           // distinct content ids
  std::map<std::pair<int, int>, int> by_key;  // (content, emotion) -> sample

  int at(int c, int e) const {
    auto it = by_key.find({c, e});
    if (it == by_key.end())
      throw ValidationError("cycle exchange needs the full content x emotion "
                            "grid; missing sample (" + std::to_string(c) +
                            ", " + std::to_string(e) + ")");
    return it->second;
  }
};

GridIndex build_index(const std::vector<synth::LoadedSample>& samples) {
  GridIndex g;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    g.by_key[{s.content_id, s.emotion_id}] = static_cast<int>(i);
    if (std::find(g.contents.begin(), g.contents.end(), s.content_id) ==
        g.contents.end())
      g.contents.push_back(s.content_id);
  }
  std::sort(g.contents.begin(), g.contents.end());
  return g;
}

void validate_aligned_groups(const std::vector<synth::LoadedSample>& samples,
                             const GridIndex& g) {
  if (samples.empty()) throw ValidationError("stage 1: empty dataset");
  bool any_aligned = false;
  for (int c : g.contents) {
    int count = 0;
    for (int e = 0; e < synth::kEmotionCount; ++e)
      if (g.by_key.count({c, e})) ++count;
    if (count >= 2) {
      any_aligned = true;
      break;
    }
  }
  if (!any_aligned)
    throw ValidationError(
        "stage 1 needs aligned same-content groups with at least two "
        "emotions; none found");
}

}  // namespace

Stage1Result train_stage1(const std::vector<synth::LoadedSample>& samples,
                          const config::RunConfig& cfg,
                          const Stage1Options& options) {
  const auto& sched = cfg.stage1;
  GridIndex grid = build_index(samples);
  validate_aligned_groups(samples, grid);

  const int dims = static_cast<int>(samples.front().rig_seq.controllers());
  Stage1Result result;
  result.bundle = AutoencoderBundle::init(dims, cfg.model, cfg.seed);
  auto& net = result.bundle.net();

  std::vector<MatR> rigs;
  rigs.reserve(samples.size());
  for (const auto& s : samples) rigs.push_back(to_real(s.rig_seq.values));

  nn::Adam<real> opt(net.params(), sched.weight_decay);
  std::mt19937_64 rng(cfg.seed ^ 0x57a6e1full);

  auto run_phase = [&](const std::string& phase, int epochs,
                       auto&& make_batches) {
    nn::StepLr lr{sched.learning_rate, sched.decay, sched.step_size};
    double epoch_loss = 0.0;
    for (int epoch = 0; epoch < epochs; ++epoch) {
      auto batches = make_batches();
      epoch_loss = 0.0;
      long items = 0;
      std::size_t cursor = 0;
      while (cursor < batches.size()) {
        const std::size_t end =
            std::min(cursor + static_cast<std::size_t>(sched.batch_size),
                     batches.size());
        int in_batch = 0;
        for (std::size_t i = cursor; i < end; ++i) {
          Tape<real> t;
          auto loss = batches[i](t);
          const double value = static_cast<double>(t.val(loss)(0, 0));
          if (!std::isfinite(value))
            throw DivergenceError("stage 1 " + phase + " loss diverged at epoch " +
                                  std::to_string(epoch));
          epoch_loss += value;
          ++items;
          ++in_batch;
          t.backward(loss);
        }
        opt.step(lr.at(epoch), 1.0 / in_batch);
        cursor = end;
      }
      epoch_loss /= std::max(1L, items);
    }
    result.phase_log.push_back({phase, epochs, epoch_loss});
  };

  using LossFn = std::function<nn::Var<real>(Tape<real>&)>;

  // Phase 1: self-reconstruction on every sample.
  run_phase("self", sched.epochs_self, [&]() {
    std::vector<int> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<LossFn> fns;
    for (int i : order)
      fns.push_back([&net, &rigs, i](Tape<real>& t) {
        return model::self_reconstruction_loss(t, net, rigs[i]);
      });
    return fns;
  });

  // Phase 2: overlap exchange on same-content pairs and, symmetrically,
  // same-emotion pairs. Each epoch draws about one pair per sample so the
  // phases see comparable numbers of gradient steps.
  if (options.use_overlap) {
    run_phase("overlap", sched.epochs_overlap, [&]() {
      std::vector<LossFn> fns;
      std::uniform_int_distribution<int> emo(0, synth::kEmotionCount - 1);
      const int per_content =
          std::max(1, (synth::kEmotionCount + 1) / 2);
      for (int c : grid.contents) {
        for (int k = 0; k < per_content; ++k) {
          int e1 = emo(rng), e2 = emo(rng);
          while (e2 == e1) e2 = emo(rng);
          if (!grid.by_key.count({c, e1}) || !grid.by_key.count({c, e2}))
            continue;
          int a = grid.at(c, e1), b = grid.at(c, e2);
          fns.push_back([&net, &rigs, a, b](Tape<real>& t) {
            return model::overlap_exchange_loss(t, net, rigs[a], rigs[b], true);
          });
        }
      }
      if (grid.contents.size() >= 2) {
        std::uniform_int_distribution<int> cont(
            0, static_cast<int>(grid.contents.size()) - 1);
        const int per_emotion =
            std::max(1, static_cast<int>(grid.contents.size()) / 2);
        for (int e = 0; e < synth::kEmotionCount; ++e) {
          for (int k = 0; k < per_emotion; ++k) {
            int c1 = grid.contents[cont(rng)], c2 = grid.contents[cont(rng)];
            while (c2 == c1) c2 = grid.contents[cont(rng)];
            if (!grid.by_key.count({c1, e}) || !grid.by_key.count({c2, e}))
              continue;
            int a = grid.at(c1, e), b = grid.at(c2, e);
            fns.push_back([&net, &rigs, a, b](Tape<real>& t) {
              return model::overlap_exchange_loss(t, net, rigs[a], rigs[b],
                                                  false);
            });
          }
        }
      }
      std::shuffle(fns.begin(), fns.end(), rng);
      return fns;
    });
  }

  // Phase 3: cycle exchange on arbitrary pairs; the grid provides targets
  // for the first-round cross products.
  if (options.use_cycle) {
    run_phase("cycle", sched.epochs_cycle, [&]() {
      std::vector<LossFn> fns;
      if (grid.contents.size() < 2) return fns;
      std::uniform_int_distribution<int> cont(
          0, static_cast<int>(grid.contents.size()) - 1);
      std::uniform_int_distribution<int> emo(0, synth::kEmotionCount - 1);
      const auto draws = samples.size() / 2;
      for (std::size_t k = 0; k < draws; ++k) {
        int c1 = grid.contents[cont(rng)], c2 = grid.contents[cont(rng)];
        while (c2 == c1) c2 = grid.contents[cont(rng)];
        int e1 = emo(rng), e2 = emo(rng);
        while (e2 == e1) e2 = emo(rng);
        int i11 = grid.at(c1, e1), i22 = grid.at(c2, e2);
        int i12 = grid.at(c2, e1), i21 = grid.at(c1, e2);
        fns.push_back([&net, &rigs, i11, i22, i12, i21](Tape<real>& t) {
          return model::cycle_exchange_loss(t, net, rigs[i11], rigs[i22],
                                            rigs[i12], rigs[i21])
              .loss;
        });
      }
      return fns;
    });
  }

  result.bundle.freeze();
  return result;
}

}  // namespace emorig::disentangle
