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

#include <string>
#include <vector>

namespace adaptpoint::nn {

enum class Init { kUniform, kZero };

/// y = x W + b. Weights start uniform in +-1/sqrt(in) unless zero-initialized.
class Linear {
 public:
  Linear() = default;
  Linear(ParameterStore& store, const std::string& name, Eigen::Index in, Eigen::Index out,
         RngStream& rng, Init init = Init::kUniform);

  Var operator()(Graph& g, Var x) const;

  Parameter& weight() const { return *w_; }
  Parameter& bias() const { return *b_; }
  Eigen::Index in_features() const { return w_->value.rows(); }
  Eigen::Index out_features() const { return w_->value.cols(); }

 private:
  Parameter* w_ = nullptr;
  Parameter* b_ = nullptr;
};

/// Stack of Linear layers with ReLU between them. `relu_last` also applies
/// ReLU after the final layer; `last_init` controls the final layer's init.
class Mlp {
 public:
  Mlp() = default;
  Mlp(ParameterStore& store, const std::string& name, const std::vector<Eigen::Index>& widths,
      RngStream& rng, bool relu_last, Init last_init = Init::kUniform);

  Var operator()(Graph& g, Var x) const;
  const std::vector<Linear>& layers() const { return layers_; }

 private:
  std::vector<Linear> layers_;
  bool relu_last_ = false;
};

class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(ParameterStore& store, const std::string& name, Eigen::Index width);

  Var operator()(Graph& g, Var x) const;

 private:
  Parameter* gain_ = nullptr;
  Parameter* bias_ = nullptr;
};

/// Transformer-style multi-head self-attention over a token set.
///
/// A learned positional embedding (3 -> C -> C MLP on raw coordinates) is
/// added to the tokens before the query/key/value projections. Heads use
/// scaled dot-product attention, are concatenated and projected, and the
/// result is added back to the input tokens before a layer norm.
class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(ParameterStore& store, const std::string& name, Eigen::Index width,
                     int heads, RngStream& rng);

  /// tokens [T x C], positions [T x 3] -> [T x C].
  Var operator()(Graph& g, Var tokens, Var positions) const;

  int heads() const { return heads_; }
  Parameter& wq() const { return *wq_; }
  Parameter& wk() const { return *wk_; }
  Parameter& wv() const { return *wv_; }
  const Linear& output() const { return out_; }
  const Mlp& position_embedding() const { return pe_; }

 private:
  Mlp pe_;
  Parameter* wq_ = nullptr;
  Parameter* wk_ = nullptr;
  Parameter* wv_ = nullptr;
  Linear out_;
  LayerNorm norm_;
  int heads_ = 1;
};

}  // namespace adaptpoint::nn
