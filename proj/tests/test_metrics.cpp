#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "emorig/metrics.h"
#include "test_util.h"

using namespace emorig;
using namespace emorig::metrics;
using rig::ControllerSets;
using rig::RigSequence;

// Independent brute-force implementations, kept deliberately naive. These
// are the oracles the fast implementations are checked against.
namespace oracle {

double region_l1(const RigSequence& a, const RigSequence& b,
                 const std::vector<int>& set) {
  double sum = 0;
  long n = 0;
  for (int t = 0; t < a.values.rows(); ++t) {
    for (int j : set) {
      sum += std::fabs(a.values(t, j) - b.values(t, j));
      n += 1;
    }
  }
  return sum / static_cast<double>(n);
}

double intensity_at(const RigSequence& r, const std::vector<int>& set, int t) {
  double s = 0;
  for (int j : set) s += std::fabs(r.values(t, j));
  return s;
}

double eie(const RigSequence& a, const RigSequence& b,
           const std::vector<int>& set) {
  double sum = 0;
  for (int t = 0; t < a.values.rows(); ++t)
    sum += std::fabs(intensity_at(a, set, t) - intensity_at(b, set, t));
  return sum / static_cast<double>(a.values.rows());
}

double col_std(const RigSequence& r, int j) {
  const int T = static_cast<int>(r.values.rows());
  double mean = 0;
  for (int t = 0; t < T; ++t) mean += r.values(t, j);
  mean /= T;
  double var = 0;
  for (int t = 0; t < T; ++t) {
    double d = r.values(t, j) - mean;
    var += d * d;
  }
  return std::sqrt(var / T);
}

double frd(const RigSequence& pred, const RigSequence& gt,
           const std::vector<int>& up) {
  double sum = 0;
  for (int j : up) sum += col_std(gt, j) - col_std(pred, j);
  return sum / static_cast<double>(up.size());
}

}  // namespace oracle

namespace {

RigSequence random_rig(int T, int D, std::mt19937_64& rng) {
  RigSequence r;
  r.fps = 30;
  r.values = testutil::random_mat(T, D, rng, -0.2, 1.2);
  return r;
}

ControllerSets small_sets() {
  ControllerSets s;
  s.lip = {0, 1, 2};
  s.emo = {3, 4, 5, 6};
  s.up = {3, 4, 5, 6};
  s.intensity = {3, 4};
  return s;
}

}  // namespace

TEST_CASE("metric hand cases") {
  auto sets = small_sets();
  std::mt19937_64 rng(31);
  auto gt = random_rig(5, 8, rng);

  SUBCASE("identical sequences give zero") {
    CHECK(mle(gt, gt, sets) == doctest::Approx(0.0));
    CHECK(mee(gt, gt, sets) == doctest::Approx(0.0));
    CHECK(eie(gt, gt, sets) == doctest::Approx(0.0));
    CHECK(frd(gt, gt, sets) == doctest::Approx(0.0));
  }

  SUBCASE("constant lip offset moves mle only") {
    auto pred = gt;
    for (int j : sets.lip) pred.values.col(j).array() += 0.01;
    CHECK(mle(pred, gt, sets) == doctest::Approx(0.01));
    CHECK(mee(pred, gt, sets) == doctest::Approx(0.0));
  }

  SUBCASE("constant emo offset moves mee, not mle") {
    auto pred = gt;
    for (int j : sets.emo) pred.values.col(j).array() += 0.02;
    CHECK(mee(pred, gt, sets) == doctest::Approx(0.02));
    CHECK(mle(pred, gt, sets) == doctest::Approx(0.0));
  }

  SUBCASE("doubling intensity columns gives eie = mean gt intensity") {
    auto pred = gt;
    for (int j : sets.intensity) pred.values.col(j) *= 2.0;
    auto gt_int = rig::pseudo_intensity(gt, sets);
    CHECK(eie(pred, gt, sets) == doctest::Approx(gt_int.values.mean()));
  }

  SUBCASE("constant prediction gives frd = mean gt column std") {
    auto pred = gt;
    for (int j : sets.up) pred.values.col(j).setConstant(0.4);
    double expect = 0;
    for (int j : sets.up) expect += oracle::col_std(gt, j);
    expect /= static_cast<double>(sets.up.size());
    CHECK(frd(pred, gt, sets) == doctest::Approx(expect));
    CHECK(frd(pred, gt, sets) > 0.0);
  }

  SUBCASE("shape mismatch rejected") {
    auto pred = random_rig(6, 8, rng);
    CHECK_THROWS_AS(mle(pred, gt, sets), ValidationError);
  }

  SUBCASE("frd needs two frames") {
    auto one = random_rig(1, 8, rng);
    CHECK_THROWS_AS(frd(one, one, sets), ValidationError);
  }
}

TEST_CASE("metrics match the brute-force oracle on randomized pairs") {
  std::mt19937_64 rng(97);
  auto sets = ControllerSets::defaults(174);
  for (int trial = 0; trial < 100; ++trial) {
    int T = 2 + static_cast<int>(rng() % 19);
    auto gt = random_rig(T, 174, rng);
    auto pred = random_rig(T, 174, rng);
    CHECK(std::fabs(mle(pred, gt, sets) - oracle::region_l1(pred, gt, sets.lip)) < 1e-12);
    CHECK(std::fabs(mee(pred, gt, sets) - oracle::region_l1(pred, gt, sets.emo)) < 1e-12);
    CHECK(std::fabs(eie(pred, gt, sets) - oracle::eie(pred, gt, sets.intensity)) < 1e-12);
    CHECK(std::fabs(frd(pred, gt, sets) - oracle::frd(pred, gt, sets.up)) < 1e-12);
  }
}

TEST_CASE("region isolation and symmetry properties") {
  std::mt19937_64 rng(55);
  auto sets = small_sets();
  auto gt = random_rig(9, 8, rng);
  auto pred = random_rig(9, 8, rng);

  SUBCASE("perturbing outside a metric's set leaves it unchanged") {
    const double m0 = mle(pred, gt, sets);
    const double e0 = mee(pred, gt, sets);
    const double i0 = eie(pred, gt, sets);
    const double f0 = frd(pred, gt, sets);

    auto p2 = pred;
    p2.values.col(7).array() += 3.0;  // column 7 is in no set
    CHECK(mle(p2, gt, sets) == doctest::Approx(m0));
    CHECK(mee(p2, gt, sets) == doctest::Approx(e0));
    CHECK(eie(p2, gt, sets) == doctest::Approx(i0));
    CHECK(frd(p2, gt, sets) == doctest::Approx(f0));

    auto p3 = pred;
    for (int j : sets.lip) p3.values.col(j).array() += 0.5;
    CHECK(mee(p3, gt, sets) == doctest::Approx(e0));
    CHECK(eie(p3, gt, sets) == doctest::Approx(i0));
    CHECK(frd(p3, gt, sets) == doctest::Approx(f0));
    CHECK(mle(p3, gt, sets) != doctest::Approx(m0));

    auto p4 = pred;
    p4.values.col(5).array() *= -1.3;  // emo/up but not intensity
    CHECK(eie(p4, gt, sets) == doctest::Approx(i0));
    CHECK(mle(p4, gt, sets) == doctest::Approx(m0));
  }

  SUBCASE("mle/mee/eie symmetric, frd antisymmetric") {
    CHECK(mle(pred, gt, sets) == doctest::Approx(mle(gt, pred, sets)));
    CHECK(mee(pred, gt, sets) == doctest::Approx(mee(gt, pred, sets)));
    CHECK(eie(pred, gt, sets) == doctest::Approx(eie(gt, pred, sets)));
    CHECK(frd(pred, gt, sets) == doctest::Approx(-frd(gt, pred, sets)));
    CHECK(frd(pred, gt, sets, true) == doctest::Approx(std::fabs(frd(pred, gt, sets))));
  }

  SUBCASE("metrics nonnegative except frd") {
    CHECK(mle(pred, gt, sets) >= 0.0);
    CHECK(mee(pred, gt, sets) >= 0.0);
    CHECK(eie(pred, gt, sets) >= 0.0);
  }
}

TEST_CASE("corpus evaluation") {
  namespace fs = std::filesystem;
  std::mt19937_64 rng(77);
  auto sets = small_sets();
  auto dir = fs::temp_directory_path() / "emorig_metrics_corpus";
  fs::remove_all(dir);
  fs::create_directories(dir / "gt");
  fs::create_directories(dir / "pred");

  auto a = random_rig(6, 8, rng);
  auto b = random_rig(7, 8, rng);
  auto pa = random_rig(6, 8, rng);
  write_rig(a, (dir / "gt" / "a.rig").string());
  write_rig(b, (dir / "gt" / "b.rig").string());
  write_rig(pa, (dir / "pred" / "a.rig").string());
  write_rig(b, (dir / "pred" / "b.rig").string());

  SUBCASE("aggregate equals mean of per-clip rows") {
    auto rep = evaluate_corpus((dir / "pred").string(), (dir / "gt").string(), sets);
    REQUIRE(rep.per_clip.size() == 2);
    CHECK(rep.errors.empty());
    double m = (rep.per_clip[0].mle + rep.per_clip[1].mle) / 2.0;
    CHECK(std::fabs(rep.mle - m) < 1e-9);
    // clip b is identical to its gt
    CHECK(rep.per_clip[1].mle == doctest::Approx(0.0));
    CHECK(rep.per_clip[1].frd == doctest::Approx(0.0));
  }

  SUBCASE("identical pair corpus reports zeros") {
    fs::remove(dir / "pred" / "a.rig");
    write_rig(a, (dir / "pred" / "a.rig").string());
    auto rep = evaluate_corpus((dir / "pred").string(), (dir / "gt").string(), sets);
    CHECK(rep.mle == doctest::Approx(0.0));
    CHECK(rep.mee == doctest::Approx(0.0));
    CHECK(rep.eie == doctest::Approx(0.0));
    CHECK(rep.frd == doctest::Approx(0.0));
  }

  SUBCASE("missing counterpart is listed and skipped") {
    fs::remove(dir / "pred" / "b.rig");
    auto rep = evaluate_corpus((dir / "pred").string(), (dir / "gt").string(), sets);
    CHECK(rep.per_clip.size() == 1);
    REQUIRE(rep.errors.size() == 1);
    CHECK(rep.errors[0].find("b.rig") != std::string::npos);
  }

  SUBCASE("csv includes per-clip and aggregate rows") {
    auto rep = evaluate_corpus((dir / "pred").string(), (dir / "gt").string(), sets);
    auto csv = rep.to_csv();
    CHECK(csv.find("a.rig") != std::string::npos);
    CHECK(csv.find("aggregate") != std::string::npos);
  }
}
