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

#include "emorig/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

namespace emorig::synth {

namespace {

using Json = nlohmann::json;

// Resting intensity per emotion category; angry peaks, neutral is lowest.
constexpr double kBaseIntensity[kEmotionCount] = {0.35, 0.80, 1.00, 0.50,
                                                  0.90, 0.70, 0.60};

// The L1 mass every emotion direction puts on the intensity set. A shared
// mass keeps the pseudo-intensity an affine view of the generative curve.
constexpr double kIntensityMass = 3.0;

std::mt19937_64 substream(std::uint64_t seed, const std::string& tag) {
  return std::mt19937_64(fnv1a(tag, seed ^ 0x9e3779b97f4a7c15ull));
}

Eigen::VectorXd white(int n, std::mt19937_64& rng, double lo = -1, double hi = 1) {
  std::uniform_real_distribution<double> d(lo, hi);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = d(rng);
  return v;
}

Eigen::VectorXd gaussian(int n, std::mt19937_64& rng, double sigma = 1.0) {
  std::normal_distribution<double> d(0.0, sigma);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = d(rng);
  return v;
}

// Low-pass filtered unit-variance noise: white noise convolved with a
// truncated Gaussian kernel, then standardized.
Eigen::VectorXd smooth_noise(int T, double sigma_frames, std::mt19937_64& rng) {
  const int half = std::max(1, static_cast<int>(std::ceil(3.0 * sigma_frames)));
  Eigen::VectorXd kernel(2 * half + 1);
  for (int k = -half; k <= half; ++k)
    kernel(k + half) = std::exp(-0.5 * (k * k) / (sigma_frames * sigma_frames));
  kernel /= kernel.sum();

  Eigen::VectorXd noise = gaussian(T + 2 * half, rng);
  Eigen::VectorXd out(T);
  for (int t = 0; t < T; ++t) {
    double acc = 0;
    for (int k = 0; k < kernel.size(); ++k) acc += kernel(k) * noise(t + k);
    out(t) = acc;
  }
  const double mean = out.mean();
  double sd = std::sqrt((out.array() - mean).square().sum() / T);
  if (sd < 1e-12) sd = 1.0;
  return (out.array() - mean) / sd;
}

// Smooth positive bumps marking emotionally loaded words.
Eigen::VectorXd word_bumps(int T, std::mt19937_64& rng) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(T);
  const double centers[3] = {0.2, 0.5, 0.8};
  std::uniform_real_distribution<double> jitter(-0.08, 0.08);
  std::uniform_real_distribution<double> amp(0.15, 0.45);
  const double width = std::max(2.0, T / 18.0);
  for (double base_c : centers) {
    const double c = (base_c + jitter(rng)) * T;
    const double a = amp(rng);
    for (int t = 0; t < T; ++t)
      w(t) += a * std::exp(-0.5 * (t - c) * (t - c) / (width * width));
  }
  return w;
}

bool in_set(const std::vector<int>& set, int j) {
  return std::find(set.begin(), set.end(), j) != set.end();
}

}  // namespace

int emotion_index(const std::string& name) {
  for (int i = 0; i < kEmotionCount; ++i)
    if (kEmotionNames[i] == name) return i;
  std::string valid;
  for (const auto& n : kEmotionNames) valid += n + " ";
  throw ValidationError("unknown emotion label '" + name + "'; valid: " + valid);
}

void SynthSpec::validate() const {
  if (seq_len < 2) throw ValidationError("synth seq_len must be >= 2");
  if (dims < 2) throw ValidationError("synth dims must be >= 2");
  if (content_dim < 1) throw ValidationError("synth content_dim must be >= 1");
  if (n_contents < 1) throw ValidationError("synth n_contents must be >= 1");
  if (audio_width < content_dim + 2)
    throw ValidationError("synth audio_width must be >= content_dim + 2");
  if (text_width < kEmotionCount + 1)
    throw ValidationError("synth text_width must be >= 8");
  if (leak < 0.0 || emotion_gain < 0.0)
    throw ValidationError("synth leak and emotion_gain must be nonnegative");
  sets.validate(dims);
}

Eigen::MatrixXd SynthFactors::reconstruct() const {
  Eigen::MatrixXd out = content_contribution;
  out += gen_intensity * emotion_direction.transpose();
  out.rowwise() += bias.transpose();
  return out;
}

const SynthSample& SynthDataset::sample(int content_id, int emotion_id) const {
  for (const auto& s : samples)
    if (s.content_id == content_id && s.emotion_id == emotion_id) return s;
  throw ValidationError("no sample with content " + std::to_string(content_id) +
                        " emotion " + std::to_string(emotion_id));
}

SynthFactors SynthDataset::factorization(const SynthSample& s) const {
  if (s.content_id < 0 || s.content_id >= spec.n_contents || s.emotion_id < 0 ||
      s.emotion_id >= kEmotionCount)
    throw ValidationError("sample was not produced by this dataset");
  SynthFactors f;
  f.content_contribution =
      content_trajectories[s.content_id] * content_mixer.transpose();
  f.emotion_direction = spec.emotion_gain * emotion_directions[s.emotion_id];
  f.gen_intensity = intensity_curves[s.emotion_id];
  f.bias = bias;
  f.true_intensity = s.true_intensity.values;
  return f;
}

SynthFactors oracle_factorization(const SynthDataset& ds, const SynthSample& s) {
  return ds.factorization(s);
}

SynthDataset generate_dataset(const SynthSpec& spec) {
  spec.validate();
  const int T = spec.seq_len;
  const int D = spec.dims;

  SynthDataset ds;
  ds.spec = spec;

  // Content mixer: strong support on lip columns, leak elsewhere.
  {
    auto rng = substream(spec.seed, "content_mixer");
    ds.content_mixer.resize(D, spec.content_dim);
    for (int j = 0; j < D; ++j) {
      const double scale = in_set(spec.sets.lip, j) ? 0.18 : 0.18 * spec.leak;
      for (int k = 0; k < spec.content_dim; ++k) {
        std::normal_distribution<double> d(0.0, scale);
        ds.content_mixer(j, k) = d(rng);
      }
    }
  }

  // Bias keeps nominal values in [0, 1] territory and the intensity
  // columns away from zero so the region L1 stays affine in intensity.
  {
    auto rng = substream(spec.seed, "bias");
    ds.bias.resize(D);
    std::uniform_real_distribution<double> lip_b(0.2, 0.5);
    std::uniform_real_distribution<double> int_b(0.08, 0.15);
    std::uniform_real_distribution<double> emo_b(0.05, 0.2);
    for (int j = 0; j < D; ++j) {
      if (in_set(spec.sets.intensity, j))
        ds.bias(j) = int_b(rng);
      else if (in_set(spec.sets.lip, j))
        ds.bias(j) = lip_b(rng);
      else
        ds.bias(j) = emo_b(rng);
    }
  }

  // Per-emotion directions: positive mass kIntensityMass on the intensity
  // set, signed structure elsewhere in the emotion region, leak on lips.
  for (int e = 0; e < kEmotionCount; ++e) {
    auto rng = substream(spec.seed, "emotion_dir:" + std::to_string(e));
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(D);
    double int_mass = 0.0;
    std::uniform_real_distribution<double> pos(0.2, 1.0);
    std::normal_distribution<double> emo(0.0, 0.25);
    for (int j = 0; j < D; ++j) {
      if (in_set(spec.sets.intensity, j)) {
        dir(j) = pos(rng);
        int_mass += dir(j);
      } else if (in_set(spec.sets.emo, j) || in_set(spec.sets.up, j)) {
        dir(j) = emo(rng);
      } else if (in_set(spec.sets.lip, j)) {
        dir(j) = emo(rng) * spec.leak;
      }
    }
    for (int j : spec.sets.intensity) dir(j) *= kIntensityMass / int_mass;
    ds.emotion_directions.push_back(std::move(dir));
  }

  // Per-emotion generative intensity: resting level + soft-clipped prosody
  // fluctuation + word bumps. Positive by construction.
  for (int e = 0; e < kEmotionCount; ++e) {
    auto rng = substream(spec.seed, "intensity:" + std::to_string(e));
    Eigen::VectorXd raw = smooth_noise(T, spec.fps / 6.0, rng);
    Eigen::VectorXd prosody(T);
    for (int t = 0; t < T; ++t) prosody(t) = 0.25 * std::tanh(raw(t));
    Eigen::VectorXd bumps = word_bumps(T, rng);
    Eigen::VectorXd curve(T);
    for (int t = 0; t < T; ++t)
      curve(t) = kBaseIntensity[e] + prosody(t) + bumps(t);
    ds.intensity_curves.push_back(std::move(curve));
    ds.prosody_curves.push_back(std::move(prosody));
    ds.word_curves.push_back(std::move(bumps));
  }

  // Content trajectories.
  for (int c = 0; c < spec.n_contents; ++c) {
    auto rng = substream(spec.seed, "content:" + std::to_string(c));
    Eigen::MatrixXd traj(T, spec.content_dim);
    for (int k = 0; k < spec.content_dim; ++k)
      traj.col(k) = smooth_noise(T, spec.fps / 8.0, rng);
    ds.content_trajectories.push_back(std::move(traj));
  }

  // Feature-view mixers.
  const int n_pros = 4;
  Eigen::VectorXd pros_mix;
  Eigen::MatrixXd content_view;   // (audio_width - n_pros) x content_dim
  Eigen::VectorXd word_mix;       // text_width - 7
  Eigen::MatrixXd guide_text_mix, guide_image_mix;
  {
    auto rng = substream(spec.seed, "feature_mixers");
    pros_mix = white(n_pros, rng, 0.5, 1.5);
    content_view.resize(spec.audio_width - n_pros, spec.content_dim);
    for (int r = 0; r < content_view.rows(); ++r)
      for (int k = 0; k < spec.content_dim; ++k)
        content_view(r, k) = 0.4 * gaussian(1, rng)(0);
    word_mix = white(spec.text_width - kEmotionCount, rng, 0.5, 1.5);
    guide_text_mix.resize(spec.guidance_text_width, kEmotionCount);
    for (int r = 0; r < guide_text_mix.rows(); ++r)
      guide_text_mix.row(r) = white(kEmotionCount, rng).transpose();
    guide_image_mix.resize(spec.guidance_image_width, kEmotionCount);
    for (int r = 0; r < guide_image_mix.rows(); ++r)
      guide_image_mix.row(r) = white(kEmotionCount, rng).transpose();
  }

  // Assemble samples.
  for (int c = 0; c < spec.n_contents; ++c) {
    const Eigen::MatrixXd content_contrib =
        ds.content_trajectories[c] * ds.content_mixer.transpose();
    for (int e = 0; e < kEmotionCount; ++e) {
      SynthSample s;
      s.content_id = c;
      s.emotion_id = e;

      const Eigen::VectorXd& curve = ds.intensity_curves[e];
      s.rig_seq.fps = spec.fps;
      s.rig_seq.values = content_contrib;
      s.rig_seq.values += spec.emotion_gain * curve *
                          ds.emotion_directions[e].transpose();
      s.rig_seq.values.rowwise() += ds.bias.transpose();
      s.true_intensity = rig::pseudo_intensity(s.rig_seq, spec.sets);

      auto rng = substream(spec.seed, "sample:" + std::to_string(c) + ":" +
                                          std::to_string(e));
      std::normal_distribution<double> noise(0.0, spec.feature_noise);

      // Audio view: prosody fluctuation plus content nuisance; no
      // emotion identity and no word bumps.
      s.audio_features.fps = spec.fps;
      s.audio_features.values.resize(T, spec.audio_width);
      s.audio_features.values.leftCols(n_pros) =
          ds.prosody_curves[e] * pros_mix.transpose();
      s.audio_features.values.rightCols(spec.audio_width - n_pros) =
          ds.content_trajectories[c] * content_view.transpose();
      for (int t = 0; t < T; ++t)
        for (int k = 0; k < spec.audio_width; ++k)
          s.audio_features.values(t, k) += noise(rng);

      // Text view: constant emotion identity block plus word timing.
      s.text_features.fps = spec.fps;
      s.text_features.values.setZero(T, spec.text_width);
      s.text_features.values.col(e).setConstant(0.8);
      s.text_features.values.rightCols(spec.text_width - kEmotionCount) =
          ds.word_curves[e] * word_mix.transpose();
      for (int t = 0; t < T; ++t)
        for (int k = 0; k < spec.text_width; ++k)
          s.text_features.values(t, k) += noise(rng);

      // Guidance vectors: noisy linear images of the one-hot.
      Eigen::VectorXd onehot = Eigen::VectorXd::Zero(kEmotionCount);
      onehot(e) = 1.0;
      s.guidance_text =
          guide_text_mix * onehot +
          spec.guidance_noise * gaussian(spec.guidance_text_width, rng);
      s.guidance_image =
          guide_image_mix * onehot +
          spec.guidance_noise * gaussian(spec.guidance_image_width, rng);

      ds.samples.push_back(std::move(s));
    }
  }
  return ds;
}

// ---------------------------------------------------------------------------
// On-disk form.
// ---------------------------------------------------------------------------

namespace {

std::string clip_stem(int c, int e) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "c%03d_e%d", c, e);
  return buf;
}

}  // namespace

void save_dataset(const SynthDataset& ds, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "rigs");
  fs::create_directories(fs::path(dir) / "features");
  fs::create_directories(fs::path(dir) / "guidance");

  Json manifest;
  manifest["version"] = 1;
  manifest["fps"] = ds.spec.fps;
  manifest["dims"] = ds.spec.dims;
  manifest["n_contents"] = ds.spec.n_contents;
  manifest["n_emotions"] = kEmotionCount;
  manifest["samples"] = Json::array();

  for (const auto& s : ds.samples) {
    const auto stem = clip_stem(s.content_id, s.emotion_id);
    const auto rig_rel = "rigs/" + stem + ".rig";
    const auto audio_rel = "features/" + stem + ".audio.feat";
    const auto text_rel = "features/" + stem + ".text.feat";
    const auto int_rel = "features/" + stem + ".intensity.feat";
    const auto gtext_rel = "guidance/" + stem + ".text.vec";
    const auto gimage_rel = "guidance/" + stem + ".image.vec";

    rig::write_rig(s.rig_seq, dir + "/" + rig_rel);
    rig::write_features(s.audio_features, dir + "/" + audio_rel);
    rig::write_features(s.text_features, dir + "/" + text_rel);
    rig::FeatureStream curve;
    curve.fps = s.true_intensity.fps;
    curve.values = s.true_intensity.values;
    rig::write_features(curve, dir + "/" + int_rel);
    rig::write_vector(s.guidance_text, dir + "/" + gtext_rel);
    rig::write_vector(s.guidance_image, dir + "/" + gimage_rel);

    Json entry;
    entry["content_id"] = s.content_id;
    entry["emotion_id"] = s.emotion_id;
    entry["rig"] = rig_rel;
    entry["audio"] = audio_rel;
    entry["text"] = text_rel;
    entry["intensity"] = int_rel;
    entry["guidance_text"] = gtext_rel;
    entry["guidance_image"] = gimage_rel;
    manifest["samples"].push_back(entry);
  }

  std::ofstream out(fs::path(dir) / "dataset.json");
  if (!out) throw IoError("cannot write manifest in " + dir);
  out << manifest.dump(2) << "\n";
}

LoadedDataset load_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  const auto manifest_path = fs::path(dir) / "dataset.json";
  std::ifstream in(manifest_path);
  if (!in) throw IoError("missing dataset manifest: " + manifest_path.string());
  Json manifest;
  try {
    in >> manifest;
  } catch (const Json::exception& e) {
    throw IoError("malformed dataset manifest: " + std::string(e.what()));
  }
  if (manifest.value("version", 0) != 1)
    throw IoError("unsupported dataset manifest version");

  LoadedDataset ds;
  ds.fps = manifest.at("fps").get<int>();
  ds.dims = manifest.at("dims").get<int>();
  ds.n_contents = manifest.at("n_contents").get<int>();
  for (const auto& entry : manifest.at("samples")) {
    LoadedSample s;
    s.content_id = entry.at("content_id").get<int>();
    s.emotion_id = entry.at("emotion_id").get<int>();
    s.rig_seq = rig::read_rig(dir + "/" + entry.at("rig").get<std::string>());
    s.audio_features =
        rig::read_features(dir + "/" + entry.at("audio").get<std::string>());
    s.text_features =
        rig::read_features(dir + "/" + entry.at("text").get<std::string>());
    auto curve =
        rig::read_features(dir + "/" + entry.at("intensity").get<std::string>());
    s.true_intensity.fps = curve.fps;
    s.true_intensity.values = curve.values.col(0);
    s.guidance_text =
        rig::read_vector(dir + "/" + entry.at("guidance_text").get<std::string>());
    s.guidance_image =
        rig::read_vector(dir + "/" + entry.at("guidance_image").get<std::string>());
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

LoadedDataset to_loaded(const SynthDataset& ds) {
  LoadedDataset out;
  out.fps = ds.spec.fps;
  out.dims = ds.spec.dims;
  out.n_contents = ds.spec.n_contents;
  for (const auto& s : ds.samples) {
    LoadedSample l;
    l.content_id = s.content_id;
    l.emotion_id = s.emotion_id;
    l.rig_seq = s.rig_seq;
    l.true_intensity = s.true_intensity;
    l.audio_features = s.audio_features;
    l.text_features = s.text_features;
    l.guidance_text = s.guidance_text;
    l.guidance_image = s.guidance_image;
    out.samples.push_back(std::move(l));
  }
  return out;
}

}  // namespace emorig::synth
