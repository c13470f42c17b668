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

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "emorig/common.h"

namespace emorig::nn {

template <typename S>
using MatT = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

// A named trainable matrix with its gradient accumulator and Adam state.
template <typename S>
struct Parameter {
  std::string name;
  MatT<S> value;
  MatT<S> grad;
  MatT<S> adam_m;
  MatT<S> adam_v;
  bool frozen = false;

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

// Reverse-mode tape over dense matrices. Nodes are created in topological
// order; backward() walks them in reverse. One tape per forward pass.
template <typename S>
class Tape {
 public:
  using Mat = MatT<S>;

  struct Var {
    int id = -1;
  };

  struct Node {
    Mat value;
    Mat grad;
    bool needs_grad = false;
    std::function<void(Tape&, int)> back;  // (tape, own id)
  };

  Tape() { nodes_.reserve(256); }

  const Mat& val(Var v) const { return nodes_[v.id].value; }
  const Mat& grad_of(Var v) const { return nodes_[v.id].grad; }
  bool needs_grad(Var v) const { return nodes_[v.id].needs_grad; }

  Var constant(Mat m) {
    nodes_.push_back(Node{std::move(m), {}, false, nullptr});
    return Var{static_cast<int>(nodes_.size() - 1)};
  }

  // Leaf backed by a Parameter. Gradients accumulate into p.grad unless the
  // parameter is frozen, in which case the leaf is a plain constant.
  Var param(Parameter<S>& p) {
    Node n;
    n.value = p.value;
    n.needs_grad = !p.frozen;
    if (!p.frozen) {
      Parameter<S>* pp = &p;
      n.back = [pp](Tape& t, int id) {
        if (pp->grad.size() == 0)
          pp->grad.setZero(pp->value.rows(), pp->value.cols());
        pp->grad += t.nodes_[id].grad;
      };
    }
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size() - 1)};
  }

  void accumulate(int id, const Mat& g) {
    Node& n = nodes_[id];
    if (!n.needs_grad) return;
    if (n.grad.size() == 0)
      n.grad = g;
    else
      n.grad += g;
  }

  void backward(Var loss) {
    Node& top = nodes_[loss.id];
    if (top.value.rows() != 1 || top.value.cols() != 1)
      throw ValidationError("backward() expects a scalar loss node");
    top.grad = Mat::Ones(1, 1);
    for (int i = loss.id; i >= 0; --i) {
      Node& n = nodes_[i];
      if (n.back && n.grad.size() != 0) n.back(*this, i);
    }
  }

  std::size_t size() const { return nodes_.size(); }

  // -- op construction helpers ------------------------------------------

  Var unary(Var a, Mat value, std::function<void(Tape&, int, int)> back) {
    Node n;
    n.value = std::move(value);
    n.needs_grad = nodes_[a.id].needs_grad;
    if (n.needs_grad) {
      int ai = a.id;
      n.back = [back, ai](Tape& t, int id) { back(t, id, ai); };
    }
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size() - 1)};
  }

  Var binary(Var a, Var b, Mat value,
             std::function<void(Tape&, int, int, int)> back) {
    Node n;
    n.value = std::move(value);
    n.needs_grad = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
    if (n.needs_grad) {
      int ai = a.id, bi = b.id;
      n.back = [back, ai, bi](Tape& t, int id) { back(t, id, ai, bi); };
    }
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size() - 1)};
  }

  std::vector<Node> nodes_;
};

template <typename S>
using Var = typename Tape<S>::Var;

// ---------------------------------------------------------------------------
// Ops. All shapes are row-major in time: sequences are T x F.
// ---------------------------------------------------------------------------

template <typename S>
Var<S> matmul(Tape<S>& t, Var<S> a, Var<S> b) {
  MatT<S> v = t.val(a) * t.val(b);
  return t.binary(a, b, std::move(v), [](Tape<S>& tp, int id, int ai, int bi) {
    const MatT<S>& g = tp.nodes_[id].grad;
    tp.accumulate(ai, g * tp.nodes_[bi].value.transpose());
    tp.accumulate(bi, tp.nodes_[ai].value.transpose() * g);
  });
}

// a * b^T without materializing the transpose in the graph.
template <typename S>
Var<S> matmul_nt(Tape<S>& t, Var<S> a, Var<S> b) {
  MatT<S> v = t.val(a) * t.val(b).transpose();
  return t.binary(a, b, std::move(v), [](Tape<S>& tp, int id, int ai, int bi) {
    const MatT<S>& g = tp.nodes_[id].grad;
    tp.accumulate(ai, g * tp.nodes_[bi].value);
    tp.accumulate(bi, g.transpose() * tp.nodes_[ai].value);
  });
}

template <typename S>
Var<S> add(Tape<S>& t, Var<S> a, Var<S> b) {
  MatT<S> v = t.val(a) + t.val(b);
  return t.binary(a, b, std::move(v), [](Tape<S>& tp, int id, int ai, int bi) {
    tp.accumulate(ai, tp.nodes_[id].grad);
    tp.accumulate(bi, tp.nodes_[id].grad);
  });
}

template <typename S>
Var<S> sub(Tape<S>& t, Var<S> a, Var<S> b) {
  MatT<S> v = t.val(a) - t.val(b);
  return t.binary(a, b, std::move(v), [](Tape<S>& tp, int id, int ai, int bi) {
    tp.accumulate(ai, tp.nodes_[id].grad);
    tp.accumulate(bi, -tp.nodes_[id].grad);
  });
}

// Adds a 1 x F row vector to every row of a T x F matrix.
template <typename S>
Var<S> add_rowvec(Tape<S>& t, Var<S> a, Var<S> b) {
  MatT<S> v = t.val(a).rowwise() + t.val(b).row(0);
  return t.binary(a, b, std::move(v), [](Tape<S>& tp, int id, int ai, int bi) {
    const MatT<S>& g = tp.nodes_[id].grad;
    tp.accumulate(ai, g);
    tp.accumulate(bi, g.colwise().sum());
  });
}

template <typename S>
Var<S> cmul(Tape<S>& t, Var<S> a, Var<S> b) {
  MatT<S> v = t.val(a).cwiseProduct(t.val(b));
  return t.binary(a, b, std::move(v), [](Tape<S>& tp, int id, int ai, int bi) {
    const MatT<S>& g = tp.nodes_[id].grad;
    tp.accumulate(ai, g.cwiseProduct(tp.nodes_[bi].value));
    tp.accumulate(bi, g.cwiseProduct(tp.nodes_[ai].value));
  });
}

// Elementwise division, same shapes.
template <typename S>
Var<S> cdiv(Tape<S>& t, Var<S> a, Var<S> b) {
  MatT<S> v = t.val(a).cwiseQuotient(t.val(b));
  return t.binary(a, b, std::move(v), [](Tape<S>& tp, int id, int ai, int bi) {
    const MatT<S>& g = tp.nodes_[id].grad;
    const MatT<S>& bv = tp.nodes_[bi].value;
    const MatT<S>& out = tp.nodes_[id].value;
    tp.accumulate(ai, g.cwiseQuotient(bv));
    tp.accumulate(bi, -g.cwiseProduct(out).cwiseQuotient(bv));
  });
}

// Divide every entry by a 1 x 1 scalar node.
template <typename S>
Var<S> div_scalar(Tape<S>& t, Var<S> a, Var<S> s) {
  S sv = t.val(s)(0, 0);
  MatT<S> v = t.val(a) / sv;
  return t.binary(a, s, std::move(v), [](Tape<S>& tp, int id, int ai, int si) {
    const MatT<S>& g = tp.nodes_[id].grad;
    S sval = tp.nodes_[si].value(0, 0);
    tp.accumulate(ai, g / sval);
    MatT<S> gs(1, 1);
    gs(0, 0) = -(g.cwiseProduct(tp.nodes_[id].value)).sum() / sval;
    tp.accumulate(si, gs);
  });
}

template <typename S>
Var<S> scale(Tape<S>& t, Var<S> a, S c) {
  MatT<S> v = t.val(a) * c;
  return t.unary(a, std::move(v), [c](Tape<S>& tp, int id, int ai) {
    tp.accumulate(ai, tp.nodes_[id].grad * c);
  });
}

template <typename S>
Var<S> add_const(Tape<S>& t, Var<S> a, S c) {
  MatT<S> v = t.val(a).array() + c;
  return t.unary(a, std::move(v), [](Tape<S>& tp, int id, int ai) {
    tp.accumulate(ai, tp.nodes_[id].grad);
  });
}

template <typename S>
Var<S> relu(Tape<S>& t, Var<S> a) {
  MatT<S> v = t.val(a).cwiseMax(S(0));
  return t.unary(a, std::move(v), [](Tape<S>& tp, int id, int ai) {
    const MatT<S>& x = tp.nodes_[ai].value;
    MatT<S> g = tp.nodes_[id].grad;
    g = (x.array() > S(0)).template cast<S>() * g.array();
    tp.accumulate(ai, g);
  });
}

template <typename S>
Var<S> tanh_op(Tape<S>& t, Var<S> a) {
  MatT<S> v = t.val(a).array().tanh();
  return t.unary(a, std::move(v), [](Tape<S>& tp, int id, int ai) {
    const MatT<S>& y = tp.nodes_[id].value;
    MatT<S> g = (S(1) - y.array().square()) * tp.nodes_[id].grad.array();
    tp.accumulate(ai, g);
  });
}

template <typename S>
Var<S> softplus(Tape<S>& t, Var<S> a) {
  // log(1 + e^x), stable for large |x|.
  MatT<S> v = t.val(a).unaryExpr([](S x) {
    if (x > S(30)) return x;
    if (x < S(-30)) return std::exp(x);
    return std::log1p(std::exp(x));
  });
  return t.unary(a, std::move(v), [](Tape<S>& tp, int id, int ai) {
    const MatT<S>& x = tp.nodes_[ai].value;
    MatT<S> sig = x.unaryExpr([](S z) { return S(1) / (S(1) + std::exp(-z)); });
    tp.accumulate(ai, tp.nodes_[id].grad.cwiseProduct(sig));
  });
}

template <typename S>
Var<S> square(Tape<S>& t, Var<S> a) {
  MatT<S> v = t.val(a).array().square();
  return t.unary(a, std::move(v), [](Tape<S>& tp, int id, int ai) {
    tp.accumulate(ai, S(2) * tp.nodes_[id].grad.cwiseProduct(tp.nodes_[ai].value));
  });
}

template <typename S>
Var<S> abs_op(Tape<S>& t, Var<S> a) {
  MatT<S> v = t.val(a).array().abs();
  return t.unary(a, std::move(v), [](Tape<S>& tp, int id, int ai) {
    const MatT<S>& x = tp.nodes_[ai].value;
    MatT<S> sign = x.unaryExpr([](S z) { return z > S(0) ? S(1) : (z < S(0) ? S(-1) : S(0)); });
    tp.accumulate(ai, tp.nodes_[id].grad.cwiseProduct(sign));
  });
}

// sqrt(x + eps); the eps is part of the forward value so finite differences
// see exactly the same function.
template <typename S>
Var<S> sqrt_eps(Tape<S>& t, Var<S> a, S eps) {
  MatT<S> v = (t.val(a).array() + eps).sqrt();
  return t.unary(a, std::move(v), [](Tape<S>& tp, int id, int ai) {
    const MatT<S>& y = tp.nodes_[id].value;
    MatT<S> g = tp.nodes_[id].grad.array() * (S(0.5) / y.array().max(S(1e-30)));
    tp.accumulate(ai, g);
  });
}

// T x F -> T x 1 row sums.
template <typename S>
Var<S> rowsum(Tape<S>& t, Var<S> a) {
  MatT<S> v = t.val(a).rowwise().sum();
  return t.unary(a, std::move(v), [](Tape<S>& tp, int id, int ai) {
    const MatT<S>& g = tp.nodes_[id].grad;
    tp.accumulate(ai, g.replicate(1, tp.nodes_[ai].value.cols()));
  });
}

template <typename S>
Var<S> sum_all(Tape<S>& t, Var<S> a) {
  MatT<S> v(1, 1);
  v(0, 0) = t.val(a).sum();
  return t.unary(a, std::move(v), [](Tape<S>& tp, int id, int ai) {
    S g = tp.nodes_[id].grad(0, 0);
    const MatT<S>& x = tp.nodes_[ai].value;
    tp.accumulate(ai, MatT<S>::Constant(x.rows(), x.cols(), g));
  });
}

template <typename S>
Var<S> mean_all(Tape<S>& t, Var<S> a) {
  const auto n = static_cast<S>(t.val(a).size());
  MatT<S> v(1, 1);
  v(0, 0) = t.val(a).sum() / n;
  return t.unary(a, std::move(v), [n](Tape<S>& tp, int id, int ai) {
    S g = tp.nodes_[id].grad(0, 0) / n;
    const MatT<S>& x = tp.nodes_[ai].value;
    tp.accumulate(ai, MatT<S>::Constant(x.rows(), x.cols(), g));
  });
}

// Row-wise softmax; rows sum to one.
template <typename S>
Var<S> softmax_rows(Tape<S>& t, Var<S> a) {
  MatT<S> v = t.val(a);
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    S mx = v.row(r).maxCoeff();
    v.row(r) = (v.row(r).array() - mx).exp();
    v.row(r) /= v.row(r).sum();
  }
  return t.unary(a, std::move(v), [](Tape<S>& tp, int id, int ai) {
    const MatT<S>& y = tp.nodes_[id].value;
    const MatT<S>& g = tp.nodes_[id].grad;
    MatT<S> out(y.rows(), y.cols());
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      S dot = y.row(r).dot(g.row(r));
      out.row(r) = (g.row(r).array() - dot) * y.row(r).array();
    }
    tp.accumulate(ai, out);
  });
}

// Time shift with zero padding: out[t] = a[t + offset] (rows out of range
// are zero). Used to express temporal convolution as shifted matmuls.
template <typename S>
Var<S> shift_rows(Tape<S>& t, Var<S> a, int offset) {
  const MatT<S>& x = t.val(a);
  const auto T = x.rows();
  MatT<S> v = MatT<S>::Zero(T, x.cols());
  for (Eigen::Index r = 0; r < T; ++r) {
    Eigen::Index src = r + offset;
    if (src >= 0 && src < T) v.row(r) = x.row(src);
  }
  return t.unary(a, std::move(v), [offset](Tape<S>& tp, int id, int ai) {
    const MatT<S>& g = tp.nodes_[id].grad;
    MatT<S> out = MatT<S>::Zero(g.rows(), g.cols());
    for (Eigen::Index r = 0; r < g.rows(); ++r) {
      Eigen::Index src = r + offset;
      if (src >= 0 && src < g.rows()) out.row(src) += g.row(r);
    }
    tp.accumulate(ai, out);
  });
}

template <typename S>
Var<S> concat_cols(Tape<S>& t, Var<S> a, Var<S> b) {
  const MatT<S>& av = t.val(a);
  const MatT<S>& bv = t.val(b);
  if (av.rows() != bv.rows())
    throw ValidationError("concat_cols: row mismatch");
  MatT<S> v(av.rows(), av.cols() + bv.cols());
  v << av, bv;
  const auto ac = av.cols();
  return t.binary(a, b, std::move(v),
                  [ac](Tape<S>& tp, int id, int ai, int bi) {
    const MatT<S>& g = tp.nodes_[id].grad;
    tp.accumulate(ai, g.leftCols(ac));
    tp.accumulate(bi, g.rightCols(g.cols() - ac));
  });
}

template <typename S>
Var<S> select_cols(Tape<S>& t, Var<S> a, std::vector<int> idx) {
  const MatT<S>& x = t.val(a);
  MatT<S> v(x.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) v.col(j) = x.col(idx[j]);
  return t.unary(a, std::move(v), [idx](Tape<S>& tp, int id, int ai) {
    const MatT<S>& g = tp.nodes_[id].grad;
    const MatT<S>& x = tp.nodes_[ai].value;
    MatT<S> out = MatT<S>::Zero(x.rows(), x.cols());
    for (std::size_t j = 0; j < idx.size(); ++j) out.col(idx[j]) += g.col(j);
    tp.accumulate(ai, out);
  });
}

template <typename S>
Var<S> select_row(Tape<S>& t, Var<S> a, int row) {
  MatT<S> v = t.val(a).row(row);
  return t.unary(a, std::move(v), [row](Tape<S>& tp, int id, int ai) {
    const MatT<S>& x = tp.nodes_[ai].value;
    MatT<S> out = MatT<S>::Zero(x.rows(), x.cols());
    out.row(row) = tp.nodes_[id].grad.row(0);
    tp.accumulate(ai, out);
  });
}

// ---------------------------------------------------------------------------
// Composite expressions used by the losses.
// ---------------------------------------------------------------------------

template <typename S>
Var<S> mse(Tape<S>& t, Var<S> pred, Var<S> target) {
  return mean_all(t, square(t, sub(t, pred, target)));
}

// 1 x 1 node holding the l2 norm of all entries: sqrt(sum x^2 + eps).
template <typename S>
Var<S> l2_norm_all(Tape<S>& t, Var<S> a, S eps = S(1e-12)) {
  return sqrt_eps(t, sum_all(t, square(t, a)), eps);
}

// Mean over frames of the cosine between rows of a and b (both T x d).
template <typename S>
Var<S> mean_row_cosine(Tape<S>& t, Var<S> a, Var<S> b, S eps = S(1e-12)) {
  Var<S> dots = rowsum(t, cmul(t, a, b));
  Var<S> na = sqrt_eps(t, rowsum(t, square(t, a)), eps);
  Var<S> nb = sqrt_eps(t, rowsum(t, square(t, b)), eps);
  return mean_all(t, cdiv(t, dots, cmul(t, na, nb)));
}

// Per-frame L1 norm over a controller subset: T x 1.
template <typename S>
Var<S> intensity_rows(Tape<S>& t, Var<S> rig, const std::vector<int>& set) {
  return rowsum(t, abs_op(t, select_cols(t, rig, set)));
}

}  // namespace emorig::nn
