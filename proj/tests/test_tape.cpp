#include <doctest.h>

#include "emorig/optim.h"
#include "test_util.h"

using namespace emorig::nn;
using testutil::DParam;
using testutil::DTape;
using testutil::DVar;
using testutil::fd_check;
using testutil::random_mat;
using Mat = Eigen::MatrixXd;

namespace {

DParam make_param(const char* name, int r, int c, std::mt19937_64& rng,
                  double lo = -1.0, double hi = 1.0) {
  DParam p;
  p.name = name;
  p.value = random_mat(r, c, rng, lo, hi);
  return p;
}

}  // namespace

TEST_CASE("forward values of elementary ops") {
  DTape t;
  Mat a(2, 2), b(2, 2);
  a << 1, -2, 3, 0.5;
  b << 2, 2, -1, 4;
  auto va = t.constant(a), vb = t.constant(b);

  CHECK(t.val(add(t, va, vb))(0, 1) == doctest::Approx(0.0));
  CHECK(t.val(sub(t, va, vb))(1, 0) == doctest::Approx(4.0));
  CHECK(t.val(cmul(t, va, vb))(1, 1) == doctest::Approx(2.0));
  CHECK(t.val(matmul(t, va, vb))(0, 0) == doctest::Approx(1 * 2 + -2 * -1));
  CHECK(t.val(relu(t, va))(0, 1) == doctest::Approx(0.0));
  CHECK(t.val(abs_op(t, va))(0, 1) == doctest::Approx(2.0));
  CHECK(t.val(rowsum(t, va))(0, 0) == doctest::Approx(-1.0));
  CHECK(t.val(mean_all(t, va))(0, 0) == doctest::Approx(2.5 / 4));
}

TEST_CASE("softmax rows sum to one and match direct computation") {
  std::mt19937_64 rng(11);
  DTape t;
  Mat a = random_mat(5, 7, rng, -3, 3);
  auto s = softmax_rows(t, t.constant(a));
  const Mat& v = t.val(s);
  for (int r = 0; r < 5; ++r) {
    CHECK(v.row(r).sum() == doctest::Approx(1.0).epsilon(1e-12));
    double denom = (a.row(r).array() - a.row(r).maxCoeff()).exp().sum();
    double first = std::exp(a(r, 0) - a.row(r).maxCoeff()) / denom;
    CHECK(v(r, 0) == doctest::Approx(first).epsilon(1e-12));
  }
}

TEST_CASE("shift_rows zero pads both directions") {
  DTape t;
  Mat a(3, 2);
  a << 1, 2, 3, 4, 5, 6;
  auto fwd = shift_rows(t, t.constant(a), 1);
  CHECK(t.val(fwd)(0, 0) == doctest::Approx(3.0));
  CHECK(t.val(fwd)(2, 0) == doctest::Approx(0.0));
  auto back = shift_rows(t, t.constant(a), -1);
  CHECK(t.val(back)(0, 0) == doctest::Approx(0.0));
  CHECK(t.val(back)(1, 1) == doctest::Approx(2.0));
}

TEST_CASE("gradients of elementary ops match finite differences") {
  std::mt19937_64 rng(42);
  DParam w = make_param("w", 4, 3, rng);
  DParam u = make_param("u", 3, 5, rng);
  DParam b = make_param("b", 1, 5, rng);

  SUBCASE("matmul + bias + relu + mean") {
    auto build = [&](DTape& t) {
      auto x = relu(t, add_rowvec(t, matmul(t, t.param(w), t.param(u)), t.param(b)));
      return mean_all(t, x);
    };
    CHECK(fd_check(build, {&w, &u, &b}) < 1e-6);
  }

  SUBCASE("matmul_nt") {
    DParam v = make_param("v", 5, 3, rng);
    auto build = [&](DTape& t) {
      return mean_all(t, matmul_nt(t, t.param(w), t.param(v)));
    };
    CHECK(fd_check(build, {&w, &v}) < 1e-6);
  }

  SUBCASE("tanh softplus square chain") {
    auto build = [&](DTape& t) {
      auto x = tanh_op(t, t.param(w));
      x = softplus(t, x);
      x = square(t, x);
      return sum_all(t, x);
    };
    CHECK(fd_check(build, {&w}) < 1e-6);
  }

  SUBCASE("abs away from zero") {
    DParam a = make_param("a", 3, 3, rng, 0.2, 1.0);
    a.value(1, 1) = -0.7;
    auto build = [&](DTape& t) { return mean_all(t, abs_op(t, t.param(a))); };
    CHECK(fd_check(build, {&a}) < 1e-6);
  }

  SUBCASE("cdiv and div_scalar") {
    DParam num = make_param("num", 4, 1, rng, 0.5, 2.0);
    DParam den = make_param("den", 4, 1, rng, 0.5, 2.0);
    DParam s = make_param("s", 1, 1, rng, 0.5, 2.0);
    auto build = [&](DTape& t) {
      auto q = cdiv(t, t.param(num), t.param(den));
      return mean_all(t, div_scalar(t, q, t.param(s)));
    };
    CHECK(fd_check(build, {&num, &den, &s}) < 1e-6);
  }

  SUBCASE("softmax rows") {
    DParam a = make_param("a", 4, 6, rng);
    DParam mix = make_param("mix", 6, 2, rng);
    auto build = [&](DTape& t) {
      auto sm = softmax_rows(t, t.param(a));
      return mean_all(t, square(t, matmul(t, sm, t.param(mix))));
    };
    CHECK(fd_check(build, {&a, &mix}) < 1e-6);
  }

  SUBCASE("shift select concat") {
    DParam a = make_param("a", 5, 4, rng);
    auto build = [&](DTape& t) {
      auto s1 = shift_rows(t, t.param(a), 2);
      auto s2 = shift_rows(t, t.param(a), -1);
      auto cat = concat_cols(t, s1, s2);
      auto sel = select_cols(t, cat, {0, 3, 5});
      return mean_all(t, square(t, sel));
    };
    CHECK(fd_check(build, {&a}) < 1e-6);
  }

  SUBCASE("select_row and sqrt_eps") {
    DParam a = make_param("a", 6, 4, rng, 0.1, 2.0);
    auto build = [&](DTape& t) {
      auto row = select_row(t, t.param(a), 2);
      return sqrt_eps(t, sum_all(t, square(t, row)), 1e-12);
    };
    CHECK(fd_check(build, {&a}) < 1e-6);
  }
}

TEST_CASE("gradients of composite losses match finite differences") {
  std::mt19937_64 rng(7);

  SUBCASE("mse") {
    DParam pred = make_param("pred", 6, 3, rng);
    Mat target = random_mat(6, 3, rng);
    auto build = [&](DTape& t) {
      return mse(t, t.param(pred), t.constant(target));
    };
    CHECK(fd_check(build, {&pred}) < 1e-6);
  }

  SUBCASE("mean row cosine") {
    DParam a = make_param("a", 5, 4, rng, 0.2, 1.0);
    DParam b = make_param("b", 5, 4, rng, 0.2, 1.0);
    auto build = [&](DTape& t) {
      return mean_row_cosine(t, t.param(a), t.param(b));
    };
    CHECK(fd_check(build, {&a, &b}) < 1e-6);
  }

  SUBCASE("intensity rows through l2 norm") {
    DParam rig = make_param("rig", 7, 6, rng, 0.2, 1.0);
    Mat gt = random_mat(7, 1, rng, 0.5, 3.0);
    std::vector<int> set{1, 3, 4};
    auto build = [&](DTape& t) {
      auto curve = intensity_rows(t, t.param(rig), set);
      return l2_norm_all(t, sub(t, curve, t.constant(gt)));
    };
    CHECK(fd_check(build, {&rig}) < 1e-6);
  }
}

TEST_CASE("linear and temporal conv layers train shapes and gradients") {
  std::mt19937_64 rng(3);
  Linear<double> lin("lin", 4, 3, rng);
  TemporalConv<double> conv("conv", 3, 3, rng);
  Mat x = random_mat(6, 4, rng);
  Mat target = random_mat(6, 3, rng);

  auto build = [&](DTape& t) {
    auto h = relu(t, lin.forward(t, t.constant(x)));
    auto y = conv.forward(t, h);
    return mse(t, y, t.constant(target));
  };

  ParamRefs<double> ps;
  lin.params(ps);
  conv.params(ps);
  CHECK(fd_check(build, ps) < 1e-6);

  DTape t;
  CHECK(t.val(conv.forward(t, t.constant(random_mat(9, 3, rng)))).rows() == 9);
}

TEST_CASE("frozen parameters receive no gradient and block optimizer updates") {
  std::mt19937_64 rng(5);
  DParam w = make_param("w", 2, 2, rng);
  w.frozen = true;
  DParam v = make_param("v", 2, 2, rng);

  DTape t;
  auto loss = mean_all(t, cmul(t, t.param(w), t.param(v)));
  v.zero_grad();
  t.backward(loss);
  CHECK(w.grad.size() == 0);
  CHECK(v.grad.size() == 4);

  Adam<double> opt({&w});
  CHECK_THROWS_AS(opt.step(0.1), emorig::ValidationError);
}

TEST_CASE("adam decreases a simple quadratic") {
  std::mt19937_64 rng(9);
  DParam w = make_param("w", 3, 3, rng);
  Mat target = random_mat(3, 3, rng);
  Adam<double> opt({&w});
  double first = 0, last = 0;
  for (int i = 0; i < 200; ++i) {
    DTape t;
    auto loss = mse(t, t.param(w), t.constant(target));
    w.zero_grad();
    t.backward(loss);
    if (i == 0) first = t.val(loss)(0, 0);
    last = t.val(loss)(0, 0);
    opt.step(0.05);
  }
  CHECK(last < 0.01 * first);
}

TEST_CASE("steplr matches the configured schedule") {
  StepLr lr{1e-3, 0.9, 10};
  CHECK(lr.at(0) == doctest::Approx(1e-3));
  CHECK(lr.at(9) == doctest::Approx(1e-3));
  CHECK(lr.at(10) == doctest::Approx(9e-4));
  CHECK(lr.at(25) == doctest::Approx(1e-3 * 0.81));
}
