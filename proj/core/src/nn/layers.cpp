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

#include "adaptpoint/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace adaptpoint::nn {

namespace {

Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, double bound, RngStream& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-bound, bound);
  return m;
}

}  // namespace

Linear::Linear(ParameterStore& store, const std::string& name, Eigen::Index in, Eigen::Index out,
               RngStream& rng, Init init) {
  if (in <= 0 || out <= 0) throw std::invalid_argument("Linear: non-positive size for " + name);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  if (init == Init::kZero) {
    w_ = &store.add(name + ".w", Matrix::Zero(in, out));
    b_ = &store.add(name + ".b", Matrix::Zero(1, out));
  } else {
    w_ = &store.add(name + ".w", uniform_matrix(in, out, bound, rng));
    b_ = &store.add(name + ".b", uniform_matrix(1, out, bound, rng));
  }
}

Var Linear::operator()(Graph& g, Var x) const { return linear(x, g.param(*w_), g.param(*b_)); }

Mlp::Mlp(ParameterStore& store, const std::string& name, const std::vector<Eigen::Index>& widths,
         RngStream& rng, bool relu_last, Init last_init)
    : relu_last_(relu_last) {
  if (widths.size() < 2) throw std::invalid_argument("Mlp: need at least input and output width");
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    const bool last = i + 2 == widths.size();
    layers_.emplace_back(store, name + "." + std::to_string(i), widths[i], widths[i + 1], rng,
                         last ? last_init : Init::kUniform);
  }
}

Var Mlp::operator()(Graph& g, Var x) const {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = layers_[i](g, x);
    if (i + 1 < layers_.size() || relu_last_) x = relu(x);
  }
  return x;
}

LayerNorm::LayerNorm(ParameterStore& store, const std::string& name, Eigen::Index width)
    : gain_(&store.add(name + ".gain", Matrix::Ones(1, width))),
      bias_(&store.add(name + ".bias", Matrix::Zero(1, width))) {}

Var LayerNorm::operator()(Graph& g, Var x) const {
  return layer_norm(x, g.param(*gain_), g.param(*bias_));
}

MultiHeadAttention::MultiHeadAttention(ParameterStore& store, const std::string& name,
                                       Eigen::Index width, int heads, RngStream& rng)
    : heads_(heads) {
  if (heads <= 0 || width % heads != 0) {
    throw std::invalid_argument("MultiHeadAttention: width " + std::to_string(width) +
                                " not divisible by " + std::to_string(heads) + " heads");
  }
  pe_ = Mlp(store, name + ".pe", {3, width, width}, rng, false);
  const double bound = 1.0 / std::sqrt(static_cast<double>(width));
  wq_ = &store.add(name + ".wq", uniform_matrix(width, width, bound, rng));
  wk_ = &store.add(name + ".wk", uniform_matrix(width, width, bound, rng));
  wv_ = &store.add(name + ".wv", uniform_matrix(width, width, bound, rng));
  out_ = Linear(store, name + ".out", width, width, rng);
  norm_ = LayerNorm(store, name + ".norm", width);
}

Var MultiHeadAttention::operator()(Graph& g, Var tokens, Var positions) const {
  const Eigen::Index width = tokens.cols();
  if (width != wq_->value.rows()) {
    throw std::invalid_argument("MultiHeadAttention: token width " + std::to_string(width) +
                                " does not match projection width " +
                                std::to_string(wq_->value.rows()));
  }
  if (positions.rows() != tokens.rows() || positions.cols() != 3) {
    throw std::invalid_argument("MultiHeadAttention: positions must be [T x 3]");
  }
  const Var x = add(tokens, pe_(g, positions));
  const Var q = matmul(x, g.param(*wq_));
  const Var k = matmul(x, g.param(*wk_));
  const Var v = matmul(x, g.param(*wv_));
  const Eigen::Index dh = width / heads_;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Var> per_head;
  per_head.reserve(static_cast<std::size_t>(heads_));
  for (int h = 0; h < heads_; ++h) {
    const Var qh = slice_cols(q, h * dh, dh);
    const Var kh = slice_cols(k, h * dh, dh);
    const Var vh = slice_cols(v, h * dh, dh);
    const Var attn = softmax_rows(scale(matmul_nt(qh, kh), inv_sqrt));
    per_head.push_back(matmul(attn, vh));
  }
  const Var merged = heads_ == 1 ? per_head.front() : concat_cols(per_head);
  return norm_(g, add(tokens, out_(g, merged)));
}

}  // namespace adaptpoint::nn
