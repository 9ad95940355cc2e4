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

namespace adaptpoint::nn {

/// Bias-corrected Adam moments for a fixed list of parameters.
struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<Matrix> m;
  std::vector<Matrix> v;
};

/// One Adam update of every parameter from its accumulated gradient. Moment
/// buffers are sized on first use; a shape change afterwards throws.
void adam_step(std::span<Parameter* const> params, AdamState& state);

/// Adam bound to a parameter list.
class Adam {
 public:
  Adam(std::vector<Parameter*> params, double lr) : params_(std::move(params)) { state_.lr = lr; }

  void step() { adam_step(params_, state_); }
  void zero_grad() {
    for (Parameter* p : params_) p->zero_grad();
  }
  const AdamState& state() const { return state_; }
  const std::vector<Parameter*>& params() const { return params_; }

 private:
  std::vector<Parameter*> params_;
  AdamState state_;
};

}  // namespace adaptpoint::nn
