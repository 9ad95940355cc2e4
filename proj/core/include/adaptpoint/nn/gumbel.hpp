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

#include "adaptpoint/nn/ops.hpp"
#include "adaptpoint/rng.hpp"

namespace adaptpoint::nn {

/// Draws an [rows x cols] matrix of standard Gumbel noise, row by row.
Matrix gumbel_noise(Eigen::Index rows, Eigen::Index cols, RngStream& rng);

/// softmax((logits + G) / tau) for fixed noise G. With `hard`, the forward
/// value is the one-hot argmax of each row (ties to the lowest column) and the
/// gradient is that of the soft sample.
Var gumbel_softmax(Var logits, const Matrix& noise, double tau, bool hard);

/// Same, drawing the noise from `rng`.
Var gumbel_softmax(Var logits, double tau, bool hard, RngStream& rng);

/// One-hot argmax per row, ties to the lowest column.
Matrix one_hot_argmax(const Matrix& y);

}  // namespace adaptpoint::nn
