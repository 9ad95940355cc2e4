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

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace adaptpoint::nn {

/// Builds a scalar loss inside the given graph. Must be deterministic: every
/// call sees the same random draws.
using LossClosure = std::function<Var(Graph&)>;

struct GradcheckOptions {
  double step = 1e-5;
  /// Tensors larger than this are checked on a seeded sample of coordinates.
  std::size_t max_coords_per_tensor = 200;
  /// Denominator floor of the relative error, so that vanishing gradients are
  /// judged on absolute error.
  double denom_floor = 1e-4;
  std::uint64_t sample_seed = 0x5eed;
  /// Perturbed evaluations reuse the branches (ReLU side, max-pool argmax,
  /// clamp and abs branch) of the unperturbed pass, so a step that crosses a
  /// kink still measures the slope of the piece backprop differentiated.
  bool freeze_branches = true;
};

struct GradcheckReport {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::string worst;  // "<param>[<index>]"
  std::size_t coords_checked = 0;
};

/// Thrown when the loss or a gradient is not finite.
class GradcheckError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Compares backward-pass gradients with central differences
/// (f(p + h) - f(p - h)) / 2h, coordinate by coordinate.
GradcheckReport gradcheck(const LossClosure& loss, const std::vector<Parameter*>& params,
                          const GradcheckOptions& opts = {});

}  // namespace adaptpoint::nn
