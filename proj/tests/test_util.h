// Shared helpers for the test binaries.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <random>
#include <vector>

#include "emorig/layers.h"
#include "emorig/tape.h"

namespace testutil {

using Mat = Eigen::MatrixXd;
using DTape = emorig::nn::Tape<double>;
using DVar = emorig::nn::Var<double>;
using DParam = emorig::nn::Parameter<double>;

inline Mat random_mat(int r, int c, std::mt19937_64& rng, double lo = -1.0,
                      double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Mat m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = d(rng);
  return m;
}

// Central finite-difference gradient check. The builder must construct the
// scalar loss from scratch on each call (parameters are read at build time).
// Returns the worst relative error across all parameter entries.
inline double fd_check(const std::function<DVar(DTape&)>& build,
                       std::vector<DParam*> params, double h = 1e-6) {
  DTape tape;
  DVar loss = build(tape);
  for (auto* p : params) p->zero_grad();
  tape.backward(loss);

  std::vector<Mat> analytic;
  for (auto* p : params) analytic.push_back(p->grad);

  auto eval = [&]() {
    DTape t2;
    return t2.val(build(t2))(0, 0);
  };

  double worst = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    DParam* p = params[pi];
    for (Eigen::Index c = 0; c < p->value.cols(); ++c) {
      for (Eigen::Index r = 0; r < p->value.rows(); ++r) {
        const double orig = p->value(r, c);
        const double step = h * std::max(1.0, std::abs(orig));
        p->value(r, c) = orig + step;
        const double up = eval();
        p->value(r, c) = orig - step;
        const double down = eval();
        p->value(r, c) = orig;
        const double fd = (up - down) / (2.0 * step);
        const double an = analytic[pi](r, c);
        const double denom = std::max({std::abs(fd), std::abs(an), 1e-8});
        worst = std::max(worst, std::abs(fd - an) / denom);
      }
    }
  }
  return worst;
}

// Ridge least-squares fit with intercept; returns predictions for X.
struct LinearProbe {
  Eigen::VectorXd beta;  // includes trailing intercept

  static LinearProbe fit(const Mat& X, const Eigen::VectorXd& y,
                         double ridge = 1e-8) {
    Mat Xa(X.rows(), X.cols() + 1);
    Xa << X, Mat::Ones(X.rows(), 1);
    Mat gram = Xa.transpose() * Xa;
    gram.diagonal().array() += ridge;
    LinearProbe p;
    p.beta = gram.ldlt().solve(Xa.transpose() * y);
    return p;
  }

  Eigen::VectorXd predict(const Mat& X) const {
    return X * beta.head(X.cols()) + Eigen::VectorXd::Constant(X.rows(), beta(X.cols()));
  }
};

inline double r_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& pred) {
  const double mean = y.mean();
  const double sst = (y.array() - mean).square().sum();
  const double sse = (y - pred).squaredNorm();
  return 1.0 - sse / sst;
}

}  // namespace testutil
