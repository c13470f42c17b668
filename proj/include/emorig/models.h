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
//
// Network definitions and the per-stage loss graphs. Everything here is
// templated on the scalar so the same graphs run in float for training and
// in double for finite-difference verification.

#pragma once

#include <optional>

#include "emorig/layers.h"
#include "emorig/optim.h"

namespace emorig::model {

using nn::Linear;
using nn::MatT;
using nn::Parameter;
using nn::ParamRefs;
using nn::Tape;
using nn::TemporalConv;
using nn::Var;

// Per-frame MLP with one temporal mixing layer; the shared shape of the
// encoders, the decoder, and the fusion encoder.
template <typename S>
struct SeqNet {
  Linear<S> in;
  TemporalConv<S> mix;
  Linear<S> out;

  SeqNet() = default;
  SeqNet(const std::string& name, int in_w, int hidden, int out_w,
         std::mt19937_64& rng)
      : in(name + ".in", in_w, hidden, rng),
        mix(name + ".mix", hidden, hidden, rng),
        out(name + ".out", hidden, out_w, rng) {}

  Var<S> forward(Tape<S>& t, Var<S> x) {
    auto h = nn::relu(t, in.forward(t, x));
    h = nn::relu(t, mix.forward(t, h));
    return out.forward(t, h);
  }

  void params(ParamRefs<S>& out_refs) {
    in.params(out_refs);
    mix.params(out_refs);
    out.params(out_refs);
  }
};

// ---------------------------------------------------------------------------
// Stage 1: motion autoencoder with separate emotion/content encoders.
// ---------------------------------------------------------------------------

template <typename S>
struct MotionAutoencoder {
  int dims = 0;
  int latent_content = 0;
  int latent_emotion = 0;
  SeqNet<S> content_enc;
  SeqNet<S> emotion_enc;
  SeqNet<S> decoder;

  static MotionAutoencoder init(int dims, int hidden, int latent_content,
                                int latent_emotion, std::mt19937_64& rng) {
    MotionAutoencoder m;
    m.dims = dims;
    m.latent_content = latent_content;
    m.latent_emotion = latent_emotion;
    m.content_enc = SeqNet<S>("content_enc", dims, hidden, latent_content, rng);
    m.emotion_enc = SeqNet<S>("emotion_enc", dims, hidden, latent_emotion, rng);
    // Decoder consumes [emotion | content] concatenated.
    m.decoder = SeqNet<S>("decoder", latent_emotion + latent_content, hidden,
                          dims, rng);
    return m;
  }

  Var<S> encode_content(Tape<S>& t, Var<S> rig) {
    return content_enc.forward(t, rig);
  }
  Var<S> encode_emotion(Tape<S>& t, Var<S> rig) {
    return emotion_enc.forward(t, rig);
  }
  Var<S> decode(Tape<S>& t, Var<S> emotion, Var<S> content) {
    return decoder.forward(t, nn::concat_cols(t, emotion, content));
  }

  void params(ParamRefs<S>& out) {
    content_enc.params(out);
    emotion_enc.params(out);
    decoder.params(out);
  }

  ParamRefs<S> params() {
    ParamRefs<S> out;
    params(out);
    return out;
  }

  void freeze() { nn::freeze_params(params()); }
  bool frozen() {
    for (auto* p : params())
      if (!p->frozen) return false;
    return true;
  }
  std::uint64_t checksum() { return nn::checksum_params(params()); }
};

// Self-reconstruction (phase 1).
template <typename S>
Var<S> self_reconstruction_loss(Tape<S>& t, MotionAutoencoder<S>& m,
                                const MatT<S>& rig) {
  Var<S> x = t.constant(rig);
  Var<S> out = m.decode(t, m.encode_emotion(t, x), m.encode_content(t, x));
  return nn::mse(t, out, x);
}

// Overlap exchange (phase 2): the pair shares one factor; the shared
// factor's counterpart embedding is swapped and each sample reconstructed.
template <typename S>
Var<S> overlap_exchange_loss(Tape<S>& t, MotionAutoencoder<S>& m,
                             const MatT<S>& rig_a, const MatT<S>& rig_b,
                             bool shared_content) {
  Var<S> a = t.constant(rig_a);
  Var<S> b = t.constant(rig_b);
  Var<S> out_a, out_b;
  if (shared_content) {
    // Same content: keep own emotion, take the partner's content embedding.
    out_a = m.decode(t, m.encode_emotion(t, a), m.encode_content(t, b));
    out_b = m.decode(t, m.encode_emotion(t, b), m.encode_content(t, a));
  } else {
    // Same emotion: keep own content, take the partner's emotion embedding.
    out_a = m.decode(t, m.encode_emotion(t, b), m.encode_content(t, a));
    out_b = m.decode(t, m.encode_emotion(t, a), m.encode_content(t, b));
  }
  return nn::add(t, nn::mse(t, out_a, a), nn::mse(t, out_b, b));
}

template <typename S>
struct CycleOutputs {
  Var<S> cross_12, cross_21;  // first round
  Var<S> back_11, back_22;    // second round
  Var<S> loss;
};

// Cycle exchange (phase 3): two rounds of cross-reconstruction over an
// arbitrary pair; the grid provides ground truth for the intermediates and
// all four reconstructions carry equal loss weight.
template <typename S>
CycleOutputs<S> cycle_exchange_loss(Tape<S>& t, MotionAutoencoder<S>& m,
                                    const MatT<S>& r11, const MatT<S>& r22,
                                    const MatT<S>& r12, const MatT<S>& r21) {
  Var<S> x11 = t.constant(r11);
  Var<S> x22 = t.constant(r22);
  CycleOutputs<S> out;
  out.cross_12 = m.decode(t, m.encode_emotion(t, x11), m.encode_content(t, x22));
  out.cross_21 = m.decode(t, m.encode_emotion(t, x22), m.encode_content(t, x11));
  out.back_11 =
      m.decode(t, m.encode_emotion(t, out.cross_12), m.encode_content(t, out.cross_21));
  out.back_22 =
      m.decode(t, m.encode_emotion(t, out.cross_21), m.encode_content(t, out.cross_12));
  Var<S> l = nn::add(t, nn::mse(t, out.cross_12, t.constant(r12)),
                     nn::mse(t, out.cross_21, t.constant(r21)));
  l = nn::add(t, l, nn::mse(t, out.back_11, x11));
  out.loss = nn::add(t, l, nn::mse(t, out.back_22, x22));
  return out;
}

// ---------------------------------------------------------------------------
// Stage 2: audio content mapping.
// ---------------------------------------------------------------------------

template <typename S>
struct AcmModel {
  int audio_width = 0;
  int latent_content = 0;
  SeqNet<S> net;

  static AcmModel init(int audio_width, int width, int latent_content,
                       std::mt19937_64& rng) {
    AcmModel m;
    m.audio_width = audio_width;
    m.latent_content = latent_content;
    m.net = SeqNet<S>("acm", audio_width, width, latent_content, rng);
    return m;
  }

  Var<S> forward(Tape<S>& t, Var<S> audio) { return net.forward(t, audio); }

  void params(ParamRefs<S>& out) { net.params(out); }
  ParamRefs<S> params() {
    ParamRefs<S> out;
    params(out);
    return out;
  }
  void freeze() { nn::freeze_params(params()); }
  std::uint64_t checksum() { return nn::checksum_params(params()); }
};

// L_ACM = mse(decode(E_e(R), ACM(A)), R) + lambda_sim * (1 - cos(E_c(R), ACM(A))).
// The frozen encoders' outputs arrive as precomputed constants; gradients
// flow through the frozen decoder into the mapping network only.
template <typename S>
Var<S> acm_loss(Tape<S>& t, AcmModel<S>& acm, MotionAutoencoder<S>& bundle,
                const MatT<S>& audio, const MatT<S>& rig,
                const MatT<S>& emotion_emb, const MatT<S>& content_emb,
                S lambda_sim) {
  Var<S> mapped = acm.forward(t, t.constant(audio));
  Var<S> out = bundle.decode(t, t.constant(emotion_emb), mapped);
  Var<S> loss = nn::mse(t, out, t.constant(rig));
  if (lambda_sim != S(0)) {
    Var<S> sim = nn::mean_row_cosine(t, t.constant(content_emb), mapped);
    Var<S> one = t.constant(MatT<S>::Ones(1, 1));
    loss = nn::add(t, loss, nn::scale(t, nn::sub(t, one, sim), lambda_sim));
  }
  return loss;
}

// ---------------------------------------------------------------------------
// Stage 3: cross-modality fusion and intensity modeling.
// ---------------------------------------------------------------------------

template <typename S>
struct CmfModel {
  int audio_width = 0;
  int text_width = 0;
  int model_dim = 0;
  int pe_dim = 0;
  Linear<S> q_proj;
  Linear<S> k_proj;
  Linear<S> v_proj;
  Linear<S> a_proj;
  Linear<S> head_mix;
  Linear<S> head_out;

  static CmfModel init(int audio_width, int text_width, int model_dim,
                       int pe_dim, std::mt19937_64& rng) {
    CmfModel m;
    m.audio_width = audio_width;
    m.text_width = text_width;
    m.model_dim = model_dim;
    m.pe_dim = pe_dim;
    m.q_proj = Linear<S>("cmf.q", audio_width + pe_dim, model_dim, rng);
    m.k_proj = Linear<S>("cmf.k", text_width + pe_dim, model_dim, rng);
    m.v_proj = Linear<S>("cmf.v", text_width, model_dim, rng);
    m.a_proj = Linear<S>("cmf.a", audio_width, model_dim, rng);
    m.head_mix = Linear<S>("cmf.head_mix", 2 * model_dim, model_dim, rng);
    m.head_out = Linear<S>("cmf.head_out", model_dim, 1, rng);
    return m;
  }

  struct Out {
    Var<S> intensity;                 // T x 1, nonnegative (softplus)
    std::optional<Var<S>> attention;  // T x L rows summing to one
  };

  // Audio frames are the queries; text tokens are keys/values. A null text
  // stream selects the audio-only fallback path (zero context).
  Out forward(Tape<S>& t, const MatT<S>& audio, const MatT<S>* text) {
    const auto T = audio.rows();
    Var<S> a = t.constant(audio);
    Var<S> ctx;
    std::optional<Var<S>> attention;
    if (text != nullptr && text->rows() > 0) {
      MatT<S> pe_q = nn::positional_encoding<S>(static_cast<int>(T), pe_dim);
      MatT<S> pe_k =
          nn::positional_encoding<S>(static_cast<int>(text->rows()), pe_dim);
      Var<S> q = q_proj.forward(t, nn::concat_cols(t, a, t.constant(pe_q)));
      Var<S> tx = t.constant(*text);
      Var<S> k = k_proj.forward(t, nn::concat_cols(t, tx, t.constant(pe_k)));
      Var<S> v = v_proj.forward(t, tx);
      Var<S> logits =
          nn::scale(t, nn::matmul_nt(t, q, k),
                    S(1) / std::sqrt(static_cast<S>(model_dim)));
      Var<S> attn = nn::softmax_rows(t, logits);
      attention = attn;
      ctx = nn::matmul(t, attn, v);
    } else {
      ctx = t.constant(MatT<S>::Zero(T, model_dim));
    }
    Var<S> fused = nn::concat_cols(t, ctx, a_proj.forward(t, a));
    Var<S> h = nn::relu(t, head_mix.forward(t, fused));
    Out out;
    out.intensity = nn::softplus(t, head_out.forward(t, h));
    out.attention = attention;
    return out;
  }

  void params(ParamRefs<S>& out) {
    q_proj.params(out);
    k_proj.params(out);
    v_proj.params(out);
    a_proj.params(out);
    head_mix.params(out);
    head_out.params(out);
  }
  ParamRefs<S> params() {
    ParamRefs<S> out;
    params(out);
    return out;
  }
  void freeze() { nn::freeze_params(params()); }
  std::uint64_t checksum() { return nn::checksum_params(params()); }
};

template <typename S>
struct LabelTable {
  Parameter<S> table;  // 7 x label_dim, rows keep strictly positive norm

  static LabelTable init(int n_labels, int label_dim, std::mt19937_64& rng) {
    LabelTable lt;
    lt.table.name = "label_table";
    nn::glorot_init(lt.table, n_labels, label_dim, rng);
    for (Eigen::Index r = 0; r < lt.table.value.rows(); ++r)
      lt.table.value.row(r) /= lt.table.value.row(r).norm();
    return lt;
  }

  ParamRefs<S> params() { return {&table}; }
  void freeze() { table.frozen = true; }
  std::uint64_t checksum() { return nn::checksum_params<S>({&table}); }
};

template <typename S>
struct FusionEncoder {
  int label_dim = 0;
  int latent_emotion = 0;
  SeqNet<S> net;

  static FusionEncoder init(int label_dim, int hidden, int latent_emotion,
                            std::mt19937_64& rng) {
    FusionEncoder f;
    f.label_dim = label_dim;
    f.latent_emotion = latent_emotion;
    f.net = SeqNet<S>("fuse", label_dim, hidden, latent_emotion, rng);
    return f;
  }

  Var<S> forward(Tape<S>& t, Var<S> dyn) { return net.forward(t, dyn); }

  void params(ParamRefs<S>& out) { net.params(out); }
  ParamRefs<S> params() {
    ParamRefs<S> out;
    params(out);
    return out;
  }
  void freeze() { nn::freeze_params(params()); }
  std::uint64_t checksum() { return nn::checksum_params(params()); }
};

// Frame-wise norm adjustment, the graph form of the inference-time
// adjust_norm: row_t = (intensity_t / ||f||) * f.
template <typename S>
Var<S> adjust_norm_graph(Tape<S>& t, Var<S> intensity, Var<S> label_row,
                         S eps = S(1e-12)) {
  Var<S> norm = nn::sqrt_eps(t, nn::sum_all(t, nn::square(t, label_row)), eps);
  return nn::div_scalar(t, nn::matmul(t, intensity, label_row), norm);
}

template <typename S>
struct FimLossParts {
  Var<S> loss;
  Var<S> intensity;  // predicted curve, T x 1
  Var<S> decoded;    // rig prediction, T x D
  Var<S> fused_emb;  // E_fuse output
};

// L_FIM = L_recon + lambda_sim (1 - cos(E_e(R), E_fuse(F))) + lambda_int
// ||Int(decoded) - Int(R)||_2, with an optional direct supervision term
// lambda_int_direct ||I_hat - Int(R)||_2 (default weight zero).
template <typename S>
FimLossParts<S> fim_loss(Tape<S>& t, CmfModel<S>& cmf, LabelTable<S>& labels,
                         FusionEncoder<S>& fuse, MotionAutoencoder<S>& bundle,
                         int emotion_id, const MatT<S>& audio,
                         const MatT<S>* text, const MatT<S>& rig,
                         const MatT<S>& content_emb, const MatT<S>& emotion_emb,
                         const MatT<S>& intensity_gt,
                         const std::vector<int>& intensity_set, S lambda_sim,
                         S lambda_int, S lambda_int_direct) {
  FimLossParts<S> parts;
  auto cmf_out = cmf.forward(t, audio, text);
  parts.intensity = cmf_out.intensity;

  Var<S> label_row = nn::select_row(t, t.param(labels.table), emotion_id);
  Var<S> dyn = adjust_norm_graph(t, parts.intensity, label_row);
  parts.fused_emb = fuse.forward(t, dyn);
  parts.decoded = bundle.decode(t, parts.fused_emb, t.constant(content_emb));

  Var<S> loss = nn::mse(t, parts.decoded, t.constant(rig));
  Var<S> one = t.constant(MatT<S>::Ones(1, 1));
  if (lambda_sim != S(0)) {
    Var<S> sim =
        nn::mean_row_cosine(t, t.constant(emotion_emb), parts.fused_emb);
    loss = nn::add(t, loss, nn::scale(t, nn::sub(t, one, sim), lambda_sim));
  }
  if (lambda_int != S(0)) {
    Var<S> pred_int = nn::intensity_rows(t, parts.decoded, intensity_set);
    Var<S> err = nn::l2_norm_all(t, nn::sub(t, pred_int, t.constant(intensity_gt)));
    loss = nn::add(t, loss, nn::scale(t, err, lambda_int));
  }
  if (lambda_int_direct != S(0)) {
    Var<S> err = nn::l2_norm_all(
        t, nn::sub(t, parts.intensity, t.constant(intensity_gt)));
    loss = nn::add(t, loss, nn::scale(t, err, lambda_int_direct));
  }
  parts.loss = loss;
  return parts;
}

// ---------------------------------------------------------------------------
// Stage 4: multimodal guidance projection heads.
// ---------------------------------------------------------------------------

template <typename S>
struct ProjectionHead {
  int input_width = 0;
  int label_dim = 0;
  Linear<S> in;
  Linear<S> out;

  static ProjectionHead init(const std::string& name, int input_width,
                             int hidden, int label_dim, std::mt19937_64& rng) {
    ProjectionHead h;
    h.input_width = input_width;
    h.label_dim = label_dim;
    h.in = Linear<S>(name + ".in", input_width, hidden, rng);
    h.out = Linear<S>(name + ".out", hidden, label_dim, rng);
    return h;
  }

  Var<S> forward(Tape<S>& t, Var<S> x) {
    return out.forward(t, nn::relu(t, in.forward(t, x)));
  }

  void params(ParamRefs<S>& o) {
    in.params(o);
    out.params(o);
  }
  ParamRefs<S> params() {
    ParamRefs<S> o;
    params(o);
    return o;
  }
  void freeze() { nn::freeze_params(params()); }
  std::uint64_t checksum() { return nn::checksum_params(params()); }
};

// L_CLIP = L_recon + lambda_sim (1 - cos(E_e(R), E_fuse(F_g))). The guided
// embedding replaces the label row; the predicted intensity arrives as a
// constant from the frozen CMF.
template <typename S>
Var<S> guidance_loss(Tape<S>& t, ProjectionHead<S>& head, FusionEncoder<S>& fuse,
                     MotionAutoencoder<S>& bundle,
                     const MatT<S>& guidance_vec,  // 1 x k
                     const MatT<S>& intensity,     // T x 1 (frozen CMF output)
                     const MatT<S>& rig, const MatT<S>& content_emb,
                     const MatT<S>& emotion_emb, S lambda_sim) {
  Var<S> projected = head.forward(t, t.constant(guidance_vec));
  Var<S> dyn = adjust_norm_graph(t, t.constant(intensity), projected);
  Var<S> fused = fuse.forward(t, dyn);
  Var<S> decoded = bundle.decode(t, fused, t.constant(content_emb));
  Var<S> loss = nn::mse(t, decoded, t.constant(rig));
  if (lambda_sim != S(0)) {
    Var<S> one = t.constant(MatT<S>::Ones(1, 1));
    Var<S> sim = nn::mean_row_cosine(t, t.constant(emotion_emb), fused);
    loss = nn::add(t, loss, nn::scale(t, nn::sub(t, one, sim), lambda_sim));
  }
  return loss;
}

}  // namespace emorig::model
