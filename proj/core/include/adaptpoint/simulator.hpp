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
#include "adaptpoint/nn/graph.hpp"
#include "adaptpoint/rng.hpp"

#include <span>
#include <vector>

namespace adaptpoint {

/// Per-anchor deformation controls. The raw values are the activations of the
/// prediction heads; the mapped values are physical quantities.
struct DeformationParams {
  Matrix raw_scale;        // M x 3, sigmoid output in (0, 1)
  Matrix raw_rotation;     // M x 3, tanh output in (-1, 1)
  Matrix raw_translation;  // M x 3, tanh output in (-1, 1)
  Matrix scale;            // M x 3 factors in [1/s_max, s_max]
  Matrix rotation;         // M x 3 Euler angles in [-theta_max, theta_max]
  Matrix translation;      // M x 3 offsets in [-t_max, t_max]

  /// Scale 1, rotation 0, translation 0 for every anchor.
  static DeformationParams identity(Eigen::Index anchors);
};

/// Per-point keep values: soft in [0, 1] or hard in {0, 1}.
struct PointMask {
  Eigen::VectorXd keep;
  bool hard = false;

  static PointMask keep_all(Eigen::Index n) { return {Eigen::VectorXd::Ones(n), true}; }
  double drop_fraction() const;
};

namespace sim {

struct FusionConfig {
  double bandwidth = 0.5;
  void validate() const;
};

/// M deformed copies of the cloud, in world frame. Each copy is stored as its
/// displacement from the input, so identity parameters give exact copies.
struct AnchorSets {
  Matrix anchors;                    // M x 3
  std::vector<Matrix> displacement;  // M entries of N x 3
  std::vector<Matrix> candidates;    // input + displacement
};

/// Transforms the cloud about every anchor d_i:
///   q_i = p - d_i,  q_i' = R_i (q_i * s_i) + t_i,  candidate = q_i' + d_i,
/// with R_i = Rz Ry Rx of the anchor's Euler angles.
AnchorSets per_anchor_deform(const Matrix& cloud, const Matrix& anchors, const DeformationParams& params);

struct FusionWeights {
  Matrix weight;                    // N x M, rows sum to 1
  std::size_t fallback_points = 0;  // rows where every kernel value underflowed
};

/// Normalized Gaussian kernel weights exp(-|p - d_i|^2 / 2h^2) of every point
/// to every anchor, computed from the original positions. A row whose kernel
/// values all underflow is assigned wholly to its nearest anchor.
FusionWeights fusion_weights(const Matrix& cloud, const Matrix& anchors, const FusionConfig& cfg);

/// Nadaraya-Watson fusion: each point moves to the weighted mean of its M
/// candidates.
Matrix fuse_anchor_sets(const AnchorSets& sets, const Matrix& cloud, const FusionConfig& cfg);

enum class MaskMode { kMultiply, kFilter };

/// Multiply scales every point by its keep value (dropped points collapse to
/// the origin). Filter removes points with keep < 0.5 and resamples the
/// survivors back to N by random duplication; it needs `rng`.
PointCloud apply_mask(const Matrix& fused, const PointMask& mask, MaskMode mode, RngStream* rng = nullptr);

// Differentiable counterparts used inside the imitator graph.

/// Displacements (candidate - input) for every anchor; scale, angles and
/// offsets are [M x 3] nodes.
std::vector<nn::Var> per_anchor_displacement(nn::Graph& g, const Matrix& cloud, const Matrix& anchors,
                                             nn::Var scale, nn::Var angles, nn::Var offsets);

/// input + sum_i w_i * displacement_i
nn::Var fuse_displacements(nn::Graph& g, const Matrix& cloud, std::span<const nn::Var> displacement,
                           const Matrix& weight);

/// Row-wise multiply by an [N x 1] mask.
nn::Var apply_mask(nn::Var fused, nn::Var mask);

}  // namespace sim
}  // namespace adaptpoint
