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

#include "adaptpoint/nn/gumbel.hpp"

#include <stdexcept>

namespace adaptpoint::nn {

Matrix gumbel_noise(Eigen::Index rows, Eigen::Index cols, RngStream& rng) {
  Matrix g(rows, cols);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = rng.gumbel();
  return g;
}

Matrix one_hot_argmax(const Matrix& y) {
  Matrix out = Matrix::Zero(y.rows(), y.cols());
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < y.cols(); ++j) {
      if (y(i, j) > y(i, best)) best = j;
    }
    out(i, best) = 1.0;
  }
  return out;
}

Var gumbel_softmax(Var logits, const Matrix& noise, double tau, bool hard) {
  if (!(tau > 0.0)) throw std::invalid_argument("gumbel_softmax: temperature must be positive");
  if (noise.rows() != logits.rows() || noise.cols() != logits.cols()) {
    throw std::invalid_argument("gumbel_softmax: noise shape does not match logits");
  }
  Graph& g = logits.graph();
  const Var soft = softmax_rows(scale(add(logits, g.constant(noise)), 1.0 / tau));
  if (!hard) return soft;
  return straight_through(soft, one_hot_argmax(soft.value()));
}

Var gumbel_softmax(Var logits, double tau, bool hard, RngStream& rng) {
  if (!(tau > 0.0)) throw std::invalid_argument("gumbel_softmax: temperature must be positive");
  return gumbel_softmax(logits, gumbel_noise(logits.rows(), logits.cols(), rng), tau, hard);
}

}  // namespace adaptpoint::nn
