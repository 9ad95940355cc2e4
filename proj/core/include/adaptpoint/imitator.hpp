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

#include "adaptpoint/geom.hpp"
#include "adaptpoint/nn/layers.hpp"
#include "adaptpoint/rng.hpp"
#include "adaptpoint/simulator.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <string>

namespace adaptpoint {

struct ImitatorConfig {
  std::size_t num_points = 256;     // N
  std::size_t num_sampled = 64;     // N'
  std::size_t num_anchors = 4;      // M
  Eigen::Index width = 32;          // C
  std::size_t neighbors = 8;        // K
  int heads = 4;
  double tau = 1.0;
  double scale_max = 2.0;
  double rotation_max = std::numbers::pi / 6.0;
  double translation_max = 0.25;
  double mask_budget = 0.5;         // largest fraction of points a hard mask may drop
  double fusion_bandwidth = 0.5;
  bool zero_init_heads = true;

  void validate() const;
};

/// Per-call switches of the forward pass.
struct ImitateOptions {
  bool use_deformation = true;
  bool use_mask = true;
  bool hard_mask = true;
  /// Replaces the predicted mask by all ones.
  bool keep_all = false;
};

/// Graph nodes produced by one forward pass.
struct ImitatorTrace {
  nn::Var output;  // N x 3 augmented points
  Matrix sampled;  // G, N' x 3
  nn::Var features;  // F, N' x C
  Matrix anchors;    // D, M x 3
  nn::Var raw_scale, raw_rotation, raw_translation;  // M x 3
  nn::Var scale, rotation, translation;              // M x 3, mapped
  nn::Var mask;                                      // N x 1 keep values (invalid when unused)
  nn::Var mask_probs;                                // N x 2 soft keep/drop probabilities
  std::size_t fallback_points = 0;

  DeformationParams params() const;
  PointMask point_mask() const;
};

struct ImitateResult {
  PointCloud augmented;
  DeformationParams params;
  PointMask mask;
};

/// Sample-adaptive augmentor. Parameters live under the `imitator.` prefix.
class Imitator {
 public:
  Imitator(const ImitatorConfig& cfg, RngStream& init_rng);

  const ImitatorConfig& config() const { return cfg_; }
  nn::ParameterStore& parameters() { return store_; }
  const nn::ParameterStore& parameters() const { return store_; }

  /// One set-abstraction level: FPS to N' centers, K neighbors from the full
  /// cloud, shared MLP on (relative xyz, center xyz), max-pool.
  std::pair<Matrix, nn::Var> extract_features(nn::Graph& g, const Matrix& cloud, std::size_t start = 0) const;

  /// fps(cloud, M, start = 0) coordinates.
  Matrix select_anchors(const Matrix& cloud) const;

  /// Per anchor: K nearest sampled points, shared MLP, max-pool. [M x C]
  nn::Var aggregate_anchor_features(nn::Graph& g, const Matrix& anchors, const Matrix& sampled,
                                    nn::Var features) const;
  nn::Var cross_anchor_interaction(nn::Graph& g, nn::Var h, const Matrix& anchors) const;
  /// max over rows of a per-row MLP. [1 x C]
  nn::Var global_anchor_feature(nn::Graph& g, nn::Var h) const;

  struct DeformationNodes {
    nn::Var raw_scale, raw_rotation, raw_translation, scale, rotation, translation;
  };
  DeformationNodes predict_deformation(nn::Graph& g, nn::Var h_prime, nn::Var global) const;

  /// Three-neighbor inverse-distance interpolation of F onto every point.
  nn::Var upsample_point_features(nn::Graph& g, nn::Var features, const Matrix& sampled,
                                  const Matrix& cloud) const;
  nn::Var cross_point_interaction(nn::Graph& g, nn::Var e, const Matrix& cloud) const;
  nn::Var global_point_feature(nn::Graph& g, nn::Var e) const;
  /// Keep/drop logits per point. [N x 2], column 0 is keep.
  nn::Var mask_logits(nn::Graph& g, nn::Var e_prime, nn::Var z) const;

  /// Gumbel-softmax over the logits with the given noise. Returns the keep
  /// column [N x 1] and the soft probabilities [N x 2]. In hard mode the
  /// drop count is clamped to the budget by restoring the points with the
  /// highest soft keep probability.
  std::pair<nn::Var, nn::Var> predict_mask(nn::Var logits, const Matrix& noise, bool hard) const;

  /// Full differentiable pipeline. Draws N x 2 Gumbel noise from `rng`.
  ImitatorTrace forward(nn::Graph& g, const Matrix& cloud, RngStream& rng, const ImitateOptions& opts = {}) const;

  /// Inference on plain values.
  ImitateResult imitate(const PointCloud& cloud, RngStream& rng, const ImitateOptions& opts = {}) const;

 private:
  ImitatorConfig cfg_;
  nn::ParameterStore store_;
  nn::Mlp extractor_;
  nn::Mlp anchor_mlp_;
  nn::MultiHeadAttention anchor_attn_;
  nn::Mlp anchor_global_;
  nn::Mlp head_scale_;
  nn::Mlp head_rotation_;
  nn::Mlp head_translation_;
  nn::MultiHeadAttention point_attn_;
  nn::Mlp point_global_;
  nn::Mlp head_mask_;
};

/// Exact forward mapping of raw head outputs to physical values.
inline double map_scale(double u, double scale_max) { return std::pow(scale_max, 2.0 * u - 1.0); }

}  // namespace adaptpoint
