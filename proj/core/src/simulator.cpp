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

#include "adaptpoint/simulator.hpp"

#include "adaptpoint/data_io.hpp"
#include "adaptpoint/nn/ops.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace adaptpoint {

DeformationParams DeformationParams::identity(Eigen::Index anchors) {
  DeformationParams p;
  p.raw_scale = Matrix::Constant(anchors, 3, 0.5);
  p.raw_rotation = Matrix::Zero(anchors, 3);
  p.raw_translation = Matrix::Zero(anchors, 3);
  p.scale = Matrix::Ones(anchors, 3);
  p.rotation = Matrix::Zero(anchors, 3);
  p.translation = Matrix::Zero(anchors, 3);
  return p;
}

double PointMask::drop_fraction() const {
  if (keep.size() == 0) return 0.0;
  return static_cast<double>((keep.array() < 0.5).count()) / static_cast<double>(keep.size());
}

namespace sim {

void FusionConfig::validate() const {
  if (!(bandwidth > 0.0)) throw std::invalid_argument("fusion bandwidth must be positive");
}

std::vector<nn::Var> per_anchor_displacement(nn::Graph& g, const Matrix& cloud, const Matrix& anchors,
                                             nn::Var scale, nn::Var angles, nn::Var offsets) {
  const Eigen::Index m = anchors.rows();
  if (scale.rows() != m || angles.rows() != m || offsets.rows() != m || scale.cols() != 3 ||
      angles.cols() != 3 || offsets.cols() != 3) {
    throw std::invalid_argument("per_anchor_deform: parameters must be [M x 3] for M anchors");
  }
  const Eigen::Index n = cloud.rows();
  std::vector<nn::Var> out;
  out.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    const Matrix centered = cloud.rowwise() - anchors.row(i);
    const nn::Var q = g.constant(centered);
    const nn::Var scaled = nn::mul(q, nn::broadcast_rows(nn::slice_rows(scale, i, 1), n));
    const nn::Var rot = nn::euler_rotation(nn::slice_rows(angles, i, 1));
    // row-vector form of R * q
    const nn::Var moved = nn::add_row(nn::matmul_nt(scaled, rot), nn::slice_rows(offsets, i, 1));
    out.push_back(nn::sub(moved, q));
  }
  return out;
}

nn::Var fuse_displacements(nn::Graph& g, const Matrix& cloud, std::span<const nn::Var> displacement,
                           const Matrix& weight) {
  if (displacement.empty()) throw std::invalid_argument("fuse_anchor_sets: no anchor sets");
  if (weight.cols() != static_cast<Eigen::Index>(displacement.size()) || weight.rows() != cloud.rows()) {
    throw std::invalid_argument("fuse_anchor_sets: weight matrix must be [N x M]");
  }
  nn::Var total;
  for (std::size_t i = 0; i < displacement.size(); ++i) {
    const nn::Var w = g.constant(weight.col(static_cast<Eigen::Index>(i)));
    const nn::Var term = nn::scale_rows(displacement[i], w);
    total = total.valid() ? nn::add(total, term) : term;
  }
  return nn::add(g.constant(cloud), total);
}

nn::Var apply_mask(nn::Var fused, nn::Var mask) { return nn::scale_rows(fused, mask); }

AnchorSets per_anchor_deform(const Matrix& cloud, const Matrix& anchors, const DeformationParams& params) {
  nn::Graph g;
  const auto disp = per_anchor_displacement(g, cloud, anchors, g.constant(params.scale),
                                            g.constant(params.rotation), g.constant(params.translation));
  AnchorSets sets;
  sets.anchors = anchors;
  for (const nn::Var& d : disp) {
    sets.displacement.push_back(d.value());
    sets.candidates.push_back(cloud + d.value());
  }
  return sets;
}

FusionWeights fusion_weights(const Matrix& cloud, const Matrix& anchors, const FusionConfig& cfg) {
  cfg.validate();
  if (anchors.rows() == 0) throw std::invalid_argument("fusion_weights: no anchors");
  FusionWeights out;
  out.weight.resize(cloud.rows(), anchors.rows());
  const double denom = 2.0 * cfg.bandwidth * cfg.bandwidth;
  for (Eigen::Index p = 0; p < cloud.rows(); ++p) {
    double total = 0.0;
    Eigen::Index nearest = 0;
    double nearest_d2 = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < anchors.rows(); ++i) {
      const double d2 = (cloud.row(p) - anchors.row(i)).squaredNorm();
      if (d2 < nearest_d2) {
        nearest_d2 = d2;
        nearest = i;
      }
      out.weight(p, i) = std::exp(-d2 / denom);
      total += out.weight(p, i);
    }
    if (total > 0.0 && std::isfinite(total)) {
      out.weight.row(p) /= total;
    } else {
      out.weight.row(p).setZero();
      out.weight(p, nearest) = 1.0;
      ++out.fallback_points;
    }
  }
  return out;
}

Matrix fuse_anchor_sets(const AnchorSets& sets, const Matrix& cloud, const FusionConfig& cfg) {
  const FusionWeights w = fusion_weights(cloud, sets.anchors, cfg);
  nn::Graph g;
  std::vector<nn::Var> disp;
  for (const Matrix& d : sets.displacement) disp.push_back(g.constant(d));
  return fuse_displacements(g, cloud, disp, w.weight).value();
}

PointCloud apply_mask(const Matrix& fused, const PointMask& mask, MaskMode mode, RngStream* rng) {
  if (mask.keep.size() != fused.rows()) throw std::invalid_argument("apply_mask: mask length differs from N");
  if (mode == MaskMode::kMultiply) {
    return PointCloud(Matrix(fused.array().colwise() * mask.keep.array()));
  }
  if (rng == nullptr) throw std::invalid_argument("apply_mask: filter mode needs a random stream");
  std::vector<int> survivors;
  for (Eigen::Index i = 0; i < fused.rows(); ++i) {
    if (mask.keep(i) >= 0.5) survivors.push_back(static_cast<int>(i));
  }
  if (survivors.empty()) throw std::invalid_argument("apply_mask: filter mode removed every point");
  return resample_to_n(PointCloud(take_rows(fused, survivors)), static_cast<std::size_t>(fused.rows()), *rng);
}

}  // namespace sim
}  // namespace adaptpoint
