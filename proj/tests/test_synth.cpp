#include <doctest.h>

#include <filesystem>

#include "emorig/metrics.h"
#include "emorig/synth.h"
#include "test_util.h"

using namespace emorig;
using namespace emorig::synth;
using testutil::LinearProbe;
using testutil::r_squared;
using Mat = Eigen::MatrixXd;

namespace {

SynthSpec small_spec() {
  SynthSpec spec;
  spec.n_contents = 6;
  spec.seq_len = 40;
  spec.seed = 123;
  return spec;
}

}  // namespace

TEST_CASE("generation is deterministic under a fixed seed") {
  auto a = generate_dataset(small_spec());
  auto b = generate_dataset(small_spec());
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK((a.samples[i].rig_seq.values == b.samples[i].rig_seq.values));
    CHECK((a.samples[i].audio_features.values == b.samples[i].audio_features.values));
    CHECK((a.samples[i].text_features.values == b.samples[i].text_features.values));
    CHECK((a.samples[i].guidance_text == b.samples[i].guidance_text));
  }
}

TEST_CASE("dataset has n_contents x 7 samples") {
  auto ds = generate_dataset(small_spec());
  CHECK(ds.samples.size() == 6 * 7);
}

TEST_CASE("degenerate specs are rejected") {
  auto spec = small_spec();
  spec.seq_len = 1;
  CHECK_THROWS_AS(generate_dataset(spec), ValidationError);
  spec = small_spec();
  spec.content_dim = 0;
  CHECK_THROWS_AS(generate_dataset(spec), ValidationError);
  spec = small_spec();
  spec.audio_width = 3;
  CHECK_THROWS_AS(generate_dataset(spec), ValidationError);
}

TEST_CASE("aligned-pair property: same content, equal content contribution") {
  auto ds = generate_dataset(small_spec());
  const auto& s1 = ds.sample(2, 1);
  const auto& s2 = ds.sample(2, 5);
  auto f1 = oracle_factorization(ds, s1);
  auto f2 = oracle_factorization(ds, s2);
  CHECK(s1.rig_seq.frames() == s2.rig_seq.frames());
  CHECK((f1.content_contribution - f2.content_contribution).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero lip support: same-content pairs agree on lip columns") {
  auto spec = small_spec();
  spec.leak = 0.0;
  auto ds = generate_dataset(spec);
  const auto& s1 = ds.sample(0, 0);
  const auto& s2 = ds.sample(0, 3);
  double max_diff = 0.0;
  for (int j : spec.sets.lip)
    max_diff = std::max(max_diff,
                        (s1.rig_seq.values.col(j) - s2.rig_seq.values.col(j))
                            .cwiseAbs()
                            .maxCoeff());
  CHECK(max_diff <= 1e-9);
}

TEST_CASE("zero emotion gain collapses the seven variants") {
  auto spec = small_spec();
  spec.emotion_gain = 0.0;
  auto ds = generate_dataset(spec);
  const auto& base = ds.sample(1, 0);
  for (int e = 1; e < kEmotionCount; ++e) {
    const auto& v = ds.sample(1, e);
    CHECK((v.rig_seq.values - base.rig_seq.values).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("oracle factorization reconstructs the sample") {
  auto ds = generate_dataset(small_spec());
  for (int idx : {0, 9, 23}) {
    const auto& s = ds.samples[static_cast<std::size_t>(idx)];
    auto f = oracle_factorization(ds, s);
    CHECK((f.reconstruct() - s.rig_seq.values).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((f.true_intensity -
           rig::pseudo_intensity(s.rig_seq, ds.spec.sets).values)
              .cwiseAbs()
              .maxCoeff() < 1e-6);
  }
}

TEST_CASE("same emotion id shares the emotion direction") {
  auto ds = generate_dataset(small_spec());
  auto fa = oracle_factorization(ds, ds.sample(0, 4));
  auto fb = oracle_factorization(ds, ds.sample(3, 4));
  CHECK((fa.emotion_direction - fb.emotion_direction).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("intensity recoverable only by fusing audio and text") {
  auto spec = small_spec();
  spec.n_contents = 10;
  spec.seq_len = 60;
  auto ds = generate_dataset(spec);

  const int T = spec.seq_len;
  const auto n = static_cast<int>(ds.samples.size());
  const int ka = spec.audio_width, kt = spec.text_width;
  Mat Xa(n * T, ka), Xt(n * T, kt), Xf(n * T, ka + kt);
  Eigen::VectorXd y(n * T);
  for (int i = 0; i < n; ++i) {
    const auto& s = ds.samples[static_cast<std::size_t>(i)];
    Xa.middleRows(i * T, T) = s.audio_features.values;
    Xt.middleRows(i * T, T) = s.text_features.values;
    Xf.middleRows(i * T, T).leftCols(ka) = s.audio_features.values;
    Xf.middleRows(i * T, T).rightCols(kt) = s.text_features.values;
    y.segment(i * T, T) = s.true_intensity.values;
  }

  double r2_fused = r_squared(y, LinearProbe::fit(Xf, y).predict(Xf));
  double r2_audio = r_squared(y, LinearProbe::fit(Xa, y).predict(Xa));
  double r2_text = r_squared(y, LinearProbe::fit(Xt, y).predict(Xt));

  CHECK(r2_fused >= 0.9);
  CHECK(r2_audio <= r2_fused - 0.05);
  CHECK(r2_text <= r2_fused - 0.05);
}

TEST_CASE("dataset save and load round trip") {
  namespace fs = std::filesystem;
  auto dir = (fs::temp_directory_path() / "emorig_synth_ds").string();
  fs::remove_all(dir);

  auto spec = small_spec();
  spec.n_contents = 2;
  auto ds = generate_dataset(spec);
  save_dataset(ds, dir);
  auto loaded = load_dataset(dir);

  CHECK(loaded.fps == spec.fps);
  CHECK(loaded.dims == spec.dims);
  REQUIRE(loaded.samples.size() == ds.samples.size());
  for (std::size_t i = 0; i < loaded.samples.size(); ++i) {
    const auto& a = loaded.samples[i];
    const auto& b = ds.samples[i];
    CHECK(a.content_id == b.content_id);
    CHECK(a.emotion_id == b.emotion_id);
    CHECK((a.rig_seq.values - b.rig_seq.values).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((a.audio_features.values - b.audio_features.values).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((a.true_intensity.values - b.true_intensity.values).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((a.guidance_image - b.guidance_image).cwiseAbs().maxCoeff() < 1e-6);
  }

  SUBCASE("missing manifest is an io error") {
    CHECK_THROWS_AS(load_dataset(dir + "_nope"), IoError);
  }
}

TEST_CASE("emotion label lookup") {
  CHECK(emotion_index("angry") == 2);
  CHECK(emotion_index("neutral") == 0);
  CHECK_THROWS_WITH_AS(emotion_index("bored"), doctest::Contains("bored"),
                       ValidationError);
}
