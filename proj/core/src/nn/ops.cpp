// Copyright 2026 The AdaptPoint Authors
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

#include "adaptpoint/nn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace adaptpoint::nn {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

std::string shape(const Matrix& m) {
  return "[" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + "]";
}

void same_shape(Var a, Var b, const char* op) {
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          std::string(op) + ": shape mismatch " + shape(a.value()) + " vs " + shape(b.value()));
}

void same_graph(Var a, Var b) {
  require(&a.graph() == &b.graph(), "operands belong to different graphs");
}

// Elementwise unary op whose derivative is a function of input and output.
template <typename Forward, typename Derivative>
Var unary(Var a, Forward fwd, Derivative deriv) {
  Graph& g = a.graph();
  Matrix out = a.value().unaryExpr(fwd);
  const int pa = a.id();
  return g.make(std::move(out), {pa}, [pa, deriv](Graph& gr, int self) {
    if (!gr.requires_grad(pa)) return;
    const Matrix& x = gr.value(pa);
    const Matrix& y = gr.value(self);
    const Matrix& up = gr.upstream(self);
    Matrix& dx = gr.grad_slot(pa);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      dx.data()[i] += up.data()[i] * deriv(x.data()[i], y.data()[i]);
    }
  });
}

// Elementwise op with a finite set of smooth branches. `branch` picks the
// branch of an input; value and slope are then functions of (x, branch).
template <typename Branch, typename Value, typename Slope>
Var piecewise(Var a, Branch branch, Value value, Slope slope) {
  Graph& g = a.graph();
  const Matrix& x = a.value();
  std::vector<int> b(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) b[static_cast<std::size_t>(i)] = branch(x.data()[i]);
  g.resolve_branches(b);
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) out.data()[i] = value(x.data()[i], b[static_cast<std::size_t>(i)]);
  const int pa = a.id();
  return g.make(std::move(out), {pa}, [pa, slope, b = std::move(b)](Graph& gr, int self) {
    if (!gr.requires_grad(pa)) return;
    const Matrix& up = gr.upstream(self);
    Matrix& dx = gr.grad_slot(pa);
    for (Eigen::Index i = 0; i < up.size(); ++i) dx.data()[i] += up.data()[i] * slope(b[static_cast<std::size_t>(i)]);
  });
}

Matrix row_softmax(const Matrix& x) {
  Matrix y(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double m = x.row(i).maxCoeff();
    y.row(i) = (x.row(i).array() - m).exp();
    y.row(i) /= y.row(i).sum();
  }
  return y;
}

}  // namespace

Var add(Var a, Var b) {
  same_graph(a, b);
  same_shape(a, b, "add");
  const int pa = a.id(), pb = b.id();
  return a.graph().make(a.value() + b.value(), {pa, pb}, [pa, pb](Graph& g, int self) {
    const Matrix& up = g.upstream(self);
    if (g.requires_grad(pa)) g.grad_slot(pa) += up;
    if (g.requires_grad(pb)) g.grad_slot(pb) += up;
  });
}

Var sub(Var a, Var b) {
  same_graph(a, b);
  same_shape(a, b, "sub");
  const int pa = a.id(), pb = b.id();
  return a.graph().make(a.value() - b.value(), {pa, pb}, [pa, pb](Graph& g, int self) {
    const Matrix& up = g.upstream(self);
    if (g.requires_grad(pa)) g.grad_slot(pa) += up;
    if (g.requires_grad(pb)) g.grad_slot(pb) -= up;
  });
}

Var mul(Var a, Var b) {
  same_graph(a, b);
  same_shape(a, b, "mul");
  const int pa = a.id(), pb = b.id();
  Matrix out = a.value().cwiseProduct(b.value());
  return a.graph().make(std::move(out), {pa, pb}, [pa, pb](Graph& g, int self) {
    const Matrix& up = g.upstream(self);
    if (g.requires_grad(pa)) g.grad_slot(pa) += up.cwiseProduct(g.value(pb));
    if (g.requires_grad(pb)) g.grad_slot(pb) += up.cwiseProduct(g.value(pa));
  });
}

Var add_row(Var a, Var row) {
  same_graph(a, row);
  require(row.rows() == 1 && row.cols() == a.cols(),
          "add_row: expected [1x" + std::to_string(a.cols()) + "], got " + shape(row.value()));
  const int pa = a.id(), pr = row.id();
  Matrix out = a.value().rowwise() + row.value().row(0);
  return a.graph().make(std::move(out), {pa, pr}, [pa, pr](Graph& g, int self) {
    const Matrix& up = g.upstream(self);
    if (g.requires_grad(pa)) g.grad_slot(pa) += up;
    if (g.requires_grad(pr)) g.grad_slot(pr) += up.colwise().sum();
  });
}

Var affine(Var a, double s, double c) {
  const int pa = a.id();
  Matrix out = (s * a.value().array() + c).matrix();
  return a.graph().make(std::move(out), {pa}, [pa, s](Graph& g, int self) {
    if (g.requires_grad(pa)) g.grad_slot(pa) += s * g.upstream(self);
  });
}

Var matmul(Var a, Var b) {
  same_graph(a, b);
  require(a.cols() == b.rows(),
          "matmul: inner dimensions differ " + shape(a.value()) + " * " + shape(b.value()));
  const int pa = a.id(), pb = b.id();
  Matrix out(a.rows(), b.cols());
  out.noalias() = a.value() * b.value();
  return a.graph().make(std::move(out), {pa, pb}, [pa, pb](Graph& g, int self) {
    const Matrix& up = g.upstream(self);
    if (g.requires_grad(pa)) g.grad_slot(pa).noalias() += up * g.value(pb).transpose();
    if (g.requires_grad(pb)) g.grad_slot(pb).noalias() += g.value(pa).transpose() * up;
  });
}

Var matmul_nt(Var a, Var b) {
  same_graph(a, b);
  require(a.cols() == b.cols(),
          "matmul_nt: inner dimensions differ " + shape(a.value()) + " * " + shape(b.value()) + "^T");
  const int pa = a.id(), pb = b.id();
  Matrix out(a.rows(), b.rows());
  out.noalias() = a.value() * b.value().transpose();
  return a.graph().make(std::move(out), {pa, pb}, [pa, pb](Graph& g, int self) {
    const Matrix& up = g.upstream(self);
    if (g.requires_grad(pa)) g.grad_slot(pa).noalias() += up * g.value(pb);
    if (g.requires_grad(pb)) g.grad_slot(pb).noalias() += up.transpose() * g.value(pa);
  });
}

Var transpose(Var a) {
  const int pa = a.id();
  Matrix out = a.value().transpose();
  return a.graph().make(std::move(out), {pa}, [pa](Graph& g, int self) {
    if (g.requires_grad(pa)) g.grad_slot(pa) += g.upstream(self).transpose();
  });
}

Var linear(Var x, Var w, Var b) {
  same_graph(x, w);
  same_graph(x, b);
  require(x.cols() == w.rows(),
          "linear: input " + shape(x.value()) + " does not match weight " + shape(w.value()));
  require(b.rows() == 1 && b.cols() == w.cols(),
          "linear: bias " + shape(b.value()) + " does not match weight " + shape(w.value()));
  const int px = x.id(), pw = w.id(), pb = b.id();
  Matrix out(x.rows(), w.cols());
  out.noalias() = x.value() * w.value();
  out.rowwise() += b.value().row(0);
  return x.graph().make(std::move(out), {px, pw, pb}, [px, pw, pb](Graph& g, int self) {
    const Matrix& up = g.upstream(self);
    if (g.requires_grad(px)) g.grad_slot(px).noalias() += up * g.value(pw).transpose();
    if (g.requires_grad(pw)) g.grad_slot(pw).noalias() += g.value(px).transpose() * up;
    if (g.requires_grad(pb)) g.grad_slot(pb) += up.colwise().sum();
  });
}

Var relu(Var a) {
  return piecewise(
      a, [](double x) { return x > 0.0 ? 1 : 0; }, [](double x, int b) { return b == 1 ? x : 0.0; },
      [](int b) { return b == 1 ? 1.0 : 0.0; });
}

Var tanh(Var a) {
  return unary(
      a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(Var a) {
  return unary(
      a,
      [](double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var exp(Var a) {
  return unary(
      a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(Var a) {
  require((a.value().array() > 0.0).all(), "log: non-positive input");
  return unary(
      a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var abs(Var a) {
  return piecewise(
      a, [](double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); },
      [](double x, int b) { return b == 0 ? std::abs(x) : b * x; }, [](int b) { return static_cast<double>(b); });
}

Var clamp(Var a, double lo, double hi) {
  require(lo <= hi, "clamp: empty interval");
  // branches: 0 below, 1 inside, 2 above
  return piecewise(
      a, [lo, hi](double x) { return x < lo ? 0 : (x > hi ? 2 : 1); },
      [lo, hi](double x, int b) { return b == 0 ? lo : (b == 2 ? hi : x); },
      [](int b) { return b == 1 ? 1.0 : 0.0; });
}

Var concat_cols(std::span<const Var> parts) {
  require(!parts.empty(), "concat_cols: no inputs");
  Graph& g = parts.front().graph();
  const Eigen::Index rows = parts.front().rows();
  Eigen::Index cols = 0;
  std::vector<int> ids;
  std::vector<Eigen::Index> offsets;
  for (const Var& p : parts) {
    require(&p.graph() == &g, "operands belong to different graphs");
    require(p.rows() == rows, "concat_cols: row counts differ");
    ids.push_back(p.id());
    offsets.push_back(cols);
    cols += p.cols();
  }
  Matrix out(rows, cols);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    out.middleCols(offsets[i], parts[i].cols()) = parts[i].value();
  }
  return g.make(std::move(out), ids, [ids, offsets](Graph& g, int self) {
    const Matrix& up = g.upstream(self);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (!g.requires_grad(ids[i])) continue;
      Matrix& d = g.grad_slot(ids[i]);
      d += up.middleCols(offsets[i], d.cols());
    }
  });
}

Var slice_cols(Var a, Eigen::Index start, Eigen::Index count) {
  require(start >= 0 && count >= 0 && start + count <= a.cols(), "slice_cols: out of range");
  const int pa = a.id();
  Matrix out = a.value().middleCols(start, count);
  return a.graph().make(std::move(out), {pa}, [pa, start, count](Graph& g, int self) {
    if (g.requires_grad(pa)) g.grad_slot(pa).middleCols(start, count) += g.upstream(self);
  });
}

Var slice_rows(Var a, Eigen::Index start, Eigen::Index count) {
  require(start >= 0 && count >= 0 && start + count <= a.rows(), "slice_rows: out of range");
  const int pa = a.id();
  Matrix out = a.value().middleRows(start, count);
  return a.graph().make(std::move(out), {pa}, [pa, start, count](Graph& g, int self) {
    if (g.requires_grad(pa)) g.grad_slot(pa).middleRows(start, count) += g.upstream(self);
  });
}

Var broadcast_rows(Var row, Eigen::Index n) {
  require(row.rows() == 1, "broadcast_rows: expected a single row, got " + shape(row.value()));
  const int pr = row.id();
  Matrix out = row.value().replicate(n, 1);
  return row.graph().make(std::move(out), {pr}, [pr](Graph& g, int self) {
    if (g.requires_grad(pr)) g.grad_slot(pr) += g.upstream(self).colwise().sum();
  });
}

Var gather_rows(Var a, std::vector<int> index) {
  for (int i : index) require(i >= 0 && i < a.rows(), "gather_rows: index out of range");
  const int pa = a.id();
  Matrix out(static_cast<Eigen::Index>(index.size()), a.cols());
  for (std::size_t r = 0; r < index.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = a.value().row(index[r]);
  }
  return a.graph().make(std::move(out), {pa}, [pa, index = std::move(index)](Graph& g, int self) {
    if (!g.requires_grad(pa)) return;
    const Matrix& up = g.upstream(self);
    Matrix& d = g.grad_slot(pa);
    for (std::size_t r = 0; r < index.size(); ++r) d.row(index[r]) += up.row(static_cast<Eigen::Index>(r));
  });
}

Var weighted_gather(Var src, IndexMatrix index, Matrix weight) {
  require(index.rows() == weight.rows() && index.cols() == weight.cols(),
          "weighted_gather: index and weight shapes differ");
  require(index.size() == 0 || (index.minCoeff() >= 0 && index.maxCoeff() < src.rows()),
          "weighted_gather: index out of range");
  const int ps = src.id();
  Matrix out = Matrix::Zero(index.rows(), src.cols());
  for (Eigen::Index i = 0; i < index.rows(); ++i) {
    for (Eigen::Index j = 0; j < index.cols(); ++j) {
      out.row(i) += weight(i, j) * src.value().row(index(i, j));
    }
  }
  return src.graph().make(
      std::move(out), {ps},
      [ps, index = std::move(index), weight = std::move(weight)](Graph& g, int self) {
        if (!g.requires_grad(ps)) return;
        const Matrix& up = g.upstream(self);
        Matrix& d = g.grad_slot(ps);
        for (Eigen::Index i = 0; i < index.rows(); ++i) {
          for (Eigen::Index j = 0; j < index.cols(); ++j) d.row(index(i, j)) += weight(i, j) * up.row(i);
        }
      });
}

Var max_pool_groups(Var a, Eigen::Index group) {
  require(group > 0 && a.rows() % group == 0,
          "max_pool_groups: " + std::to_string(a.rows()) + " rows not divisible by group " +
              std::to_string(group));
  const Eigen::Index groups = a.rows() / group;
  const Matrix& x = a.value();
  Matrix out(groups, x.cols());
  std::vector<int> best(static_cast<std::size_t>(groups * x.cols()));
  for (Eigen::Index gi = 0; gi < groups; ++gi) {
    const Eigen::Index base = gi * group;
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      Eigen::Index b = base;
      for (Eigen::Index r = base + 1; r < base + group; ++r) {
        if (x(r, c) > x(b, c)) b = r;
      }
      best[static_cast<std::size_t>(gi * x.cols() + c)] = static_cast<int>(b);
    }
  }
  a.graph().resolve_branches(best);
  IndexMatrix arg = Eigen::Map<const IndexMatrix>(best.data(), groups, x.cols());
  for (Eigen::Index gi = 0; gi < groups; ++gi) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) out(gi, c) = x(arg(gi, c), c);
  }
  const int pa = a.id();
  return a.graph().make(std::move(out), {pa}, [pa, arg = std::move(arg)](Graph& g, int self) {
    if (!g.requires_grad(pa)) return;
    const Matrix& up = g.upstream(self);
    Matrix& d = g.grad_slot(pa);
    for (Eigen::Index gi = 0; gi < arg.rows(); ++gi) {
      for (Eigen::Index c = 0; c < arg.cols(); ++c) d(arg(gi, c), c) += up(gi, c);
    }
  });
}

Var sum_all(Var a) {
  const int pa = a.id();
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return a.graph().make(std::move(out), {pa}, [pa](Graph& g, int self) {
    if (g.requires_grad(pa)) g.grad_slot(pa).array() += g.upstream(self)(0, 0);
  });
}

Var mean_all(Var a) {
  require(a.value().size() > 0, "mean_all: empty tensor");
  const int pa = a.id();
  const double n = static_cast<double>(a.value().size());
  Matrix out(1, 1);
  out(0, 0) = a.value().sum() / n;
  return a.graph().make(std::move(out), {pa}, [pa, n](Graph& g, int self) {
    if (g.requires_grad(pa)) g.grad_slot(pa).array() += g.upstream(self)(0, 0) / n;
  });
}

Var mean_rows(Var a) {
  require(a.rows() > 0, "mean_rows: no rows");
  const int pa = a.id();
  const double n = static_cast<double>(a.rows());
  Matrix out = a.value().colwise().mean();
  return a.graph().make(std::move(out), {pa}, [pa, n](Graph& g, int self) {
    if (!g.requires_grad(pa)) return;
    g.grad_slot(pa).rowwise() += g.upstream(self).row(0) / n;
  });
}

Var softmax_rows(Var a) {
  const int pa = a.id();
  return a.graph().make(row_softmax(a.value()), {pa}, [pa](Graph& g, int self) {
    if (!g.requires_grad(pa)) return;
    const Matrix& y = g.value(self);
    const Matrix& up = g.upstream(self);
    const Eigen::VectorXd dot = up.cwiseProduct(y).rowwise().sum();
    Matrix& d = g.grad_slot(pa);
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      d.row(i).array() += y.row(i).array() * (up.row(i).array() - dot(i));
    }
  });
}

Var log_softmax_rows(Var a) {
  const Matrix& x = a.value();
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double m = x.row(i).maxCoeff();
    const double lse = m + std::log((x.row(i).array() - m).exp().sum());
    out.row(i) = x.row(i).array() - lse;
  }
  const int pa = a.id();
  return a.graph().make(std::move(out), {pa}, [pa](Graph& g, int self) {
    if (!g.requires_grad(pa)) return;
    const Matrix& y = g.value(self);
    const Matrix& up = g.upstream(self);
    Matrix& d = g.grad_slot(pa);
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      d.row(i).array() += up.row(i).array() - y.row(i).array().exp() * up.row(i).sum();
    }
  });
}

Var layer_norm(Var x, Var gain, Var bias, double eps) {
  same_graph(x, gain);
  same_graph(x, bias);
  const Eigen::Index c = x.cols();
  require(gain.rows() == 1 && gain.cols() == c && bias.rows() == 1 && bias.cols() == c,
          "layer_norm: gain/bias must be [1x" + std::to_string(c) + "]");
  const Matrix& in = x.value();
  Matrix xhat(in.rows(), c);
  Eigen::VectorXd inv_std(in.rows());
  for (Eigen::Index i = 0; i < in.rows(); ++i) {
    const double mu = in.row(i).mean();
    const double var = (in.row(i).array() - mu).square().mean();
    inv_std(i) = 1.0 / std::sqrt(var + eps);
    xhat.row(i) = (in.row(i).array() - mu) * inv_std(i);
  }
  Matrix out = xhat.array().rowwise() * gain.value().row(0).array();
  out.rowwise() += bias.value().row(0);
  const int px = x.id(), pg = gain.id(), pb = bias.id();
  return x.graph().make(
      std::move(out), {px, pg, pb},
      [px, pg, pb, xhat = std::move(xhat), inv_std = std::move(inv_std)](Graph& g, int self) {
        const Matrix& up = g.upstream(self);
        if (g.requires_grad(pg)) g.grad_slot(pg) += up.cwiseProduct(xhat).colwise().sum();
        if (g.requires_grad(pb)) g.grad_slot(pb) += up.colwise().sum();
        if (!g.requires_grad(px)) return;
        const double n = static_cast<double>(xhat.cols());
        const Matrix dxhat = up.array().rowwise() * g.value(pg).row(0).array();
        Matrix& d = g.grad_slot(px);
        for (Eigen::Index i = 0; i < xhat.rows(); ++i) {
          const double s1 = dxhat.row(i).sum();
          const double s2 = dxhat.row(i).dot(xhat.row(i));
          d.row(i).array() +=
              (inv_std(i) / n) * (n * dxhat.row(i).array() - s1 - xhat.row(i).array() * s2);
        }
      });
}

Var scale_rows(Var x, Var s) {
  same_graph(x, s);
  require(s.cols() == 1 && s.rows() == x.rows(),
          "scale_rows: scale must be [" + std::to_string(x.rows()) + "x1], got " + shape(s.value()));
  const int px = x.id(), ps = s.id();
  Matrix out = x.value().array().colwise() * s.value().col(0).array();
  return x.graph().make(std::move(out), {px, ps}, [px, ps](Graph& g, int self) {
    const Matrix& up = g.upstream(self);
    if (g.requires_grad(px)) {
      g.grad_slot(px).array() += up.array().colwise() * g.value(ps).col(0).array();
    }
    if (g.requires_grad(ps)) g.grad_slot(ps) += up.cwiseProduct(g.value(px)).rowwise().sum();
  });
}

Var cross_entropy(Var logits, std::span<const int> labels) {
  const Matrix& x = logits.value();
  require(static_cast<Eigen::Index>(labels.size()) == x.rows(),
          "cross_entropy: " + std::to_string(labels.size()) + " labels for " +
              std::to_string(x.rows()) + " rows");
  require(x.rows() > 0, "cross_entropy: empty batch");
  std::vector<int> lbl(labels.begin(), labels.end());
  for (int l : lbl) {
    require(l >= 0 && l < x.cols(), "cross_entropy: label " + std::to_string(l) +
                                        " out of range for " + std::to_string(x.cols()) +
                                        " classes");
  }
  Matrix prob = row_softmax(x);
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double m = x.row(i).maxCoeff();
    const double lse = m + std::log((x.row(i).array() - m).exp().sum());
    total += lse - x(i, lbl[static_cast<std::size_t>(i)]);
  }
  Matrix out(1, 1);
  out(0, 0) = total / static_cast<double>(x.rows());
  const int pl = logits.id();
  return logits.graph().make(
      std::move(out), {pl}, [pl, lbl = std::move(lbl), prob = std::move(prob)](Graph& g, int self) {
        if (!g.requires_grad(pl)) return;
        const double scale = g.upstream(self)(0, 0) / static_cast<double>(prob.rows());
        Matrix& d = g.grad_slot(pl);
        d += scale * prob;
        for (std::size_t i = 0; i < lbl.size(); ++i) d(static_cast<Eigen::Index>(i), lbl[i]) -= scale;
      });
}

namespace {

Mat3 rot_x(double a) {
  Mat3 r;
  r << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return r;
}
Mat3 rot_y(double b) {
  Mat3 r;
  r << std::cos(b), 0, std::sin(b), 0, 1, 0, -std::sin(b), 0, std::cos(b);
  return r;
}
Mat3 rot_z(double c) {
  Mat3 r;
  r << std::cos(c), -std::sin(c), 0, std::sin(c), std::cos(c), 0, 0, 0, 1;
  return r;
}
Mat3 drot_x(double a) {
  Mat3 r;
  r << 0, 0, 0, 0, -std::sin(a), -std::cos(a), 0, std::cos(a), -std::sin(a);
  return r;
}
Mat3 drot_y(double b) {
  Mat3 r;
  r << -std::sin(b), 0, std::cos(b), 0, 0, 0, -std::cos(b), 0, -std::sin(b);
  return r;
}
Mat3 drot_z(double c) {
  Mat3 r;
  r << -std::sin(c), -std::cos(c), 0, std::cos(c), -std::sin(c), 0, 0, 0, 0;
  return r;
}

}  // namespace

Var euler_rotation(Var angles) {
  require(angles.rows() == 1 && angles.cols() == 3,
          "euler_rotation: expected [1x3], got " + shape(angles.value()));
  const double a = angles.value()(0, 0), b = angles.value()(0, 1), c = angles.value()(0, 2);
  const Mat3 rx = rot_x(a), ry = rot_y(b), rz = rot_z(c);
  const Mat3 r = rz * ry * rx;
  Matrix out = r;
  const int pa = angles.id();
  return angles.graph().make(std::move(out), {pa}, [pa, a, b, c](Graph& g, int self) {
    if (!g.requires_grad(pa)) return;
    const Mat3 rx = rot_x(a), ry = rot_y(b), rz = rot_z(c);
    const Mat3 up = g.upstream(self);
    Matrix& d = g.grad_slot(pa);
    d(0, 0) += (up.array() * (rz * ry * drot_x(a)).array()).sum();
    d(0, 1) += (up.array() * (rz * drot_y(b) * rx).array()).sum();
    d(0, 2) += (up.array() * (drot_z(c) * ry * rx).array()).sum();
  });
}

Var straight_through(Var soft, Matrix hard) {
  require(hard.rows() == soft.rows() && hard.cols() == soft.cols(),
          "straight_through: shape mismatch " + shape(soft.value()) + " vs " + shape(hard));
  const int ps = soft.id();
  return soft.graph().make(std::move(hard), {ps}, [ps](Graph& g, int self) {
    if (g.requires_grad(ps)) g.grad_slot(ps) += g.upstream(self);
  });
}

Var detach(Var v) { return v.graph().constant(v.value()); }

}  // namespace adaptpoint::nn
