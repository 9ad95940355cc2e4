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

#pragma once

#include "adaptpoint/nn/graph.hpp"

#include <span>
#include <vector>

// Differentiable operations over 2-D tensors. Every op checks shapes and
// throws std::invalid_argument on a mismatch.
namespace adaptpoint::nn {

Var add(Var a, Var b);
Var sub(Var a, Var b);
/// Elementwise product.
Var mul(Var a, Var b);
/// a [R x C] + row [1 x C] broadcast over rows.
Var add_row(Var a, Var row);
/// s * a + c for scalar constants.
Var affine(Var a, double s, double c = 0.0);
inline Var scale(Var a, double s) { return affine(a, s, 0.0); }

Var matmul(Var a, Var b);
/// a * b^T
Var matmul_nt(Var a, Var b);
Var transpose(Var a);
/// x * w + b, with b [1 x out] broadcast over rows.
Var linear(Var x, Var w, Var b);

Var relu(Var a);
Var tanh(Var a);
Var sigmoid(Var a);
Var exp(Var a);
Var log(Var a);
Var abs(Var a);
/// Clamps elementwise; the gradient is zero where the input lies outside [lo, hi].
Var clamp(Var a, double lo, double hi);

Var concat_cols(std::span<const Var> parts);
Var slice_cols(Var a, Eigen::Index start, Eigen::Index count);
Var slice_rows(Var a, Eigen::Index start, Eigen::Index count);
/// Repeats a [1 x C] row n times.
Var broadcast_rows(Var row, Eigen::Index n);
/// out[i] = a[index[i]]; the backward pass scatter-adds.
Var gather_rows(Var a, std::vector<int> index);
/// out[i] = sum_j weight(i, j) * src[index(i, j)] with constant weights.
Var weighted_gather(Var src, IndexMatrix index, Matrix weight);

/// Max over consecutive groups of `group` rows: [G*group x C] -> [G x C].
/// The gradient flows only to the argmax row of each group and column; ties
/// go to the lowest row.
Var max_pool_groups(Var a, Eigen::Index group);
inline Var max_rows(Var a) { return max_pool_groups(a, a.rows()); }

Var sum_all(Var a);
Var mean_all(Var a);
/// Column means: [R x C] -> [1 x C].
Var mean_rows(Var a);

Var softmax_rows(Var a);
Var log_softmax_rows(Var a);
/// Per-row normalization with learnable gain and bias, each [1 x C].
Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);
/// Scales each row of x [R x C] by s [R x 1].
Var scale_rows(Var x, Var s);

/// Mean over rows of -log softmax(logits)[label]. Throws on out-of-range labels.
Var cross_entropy(Var logits, std::span<const int> labels);

/// [1 x 3] Euler angles -> [3 x 3] rotation Rz * Ry * Rx.
Var euler_rotation(Var angles);

/// Forward value is `hard`; the gradient passes to `soft` unchanged.
Var straight_through(Var soft, Matrix hard);

/// A constant copy of the value of v.
Var detach(Var v);

}  // namespace adaptpoint::nn
