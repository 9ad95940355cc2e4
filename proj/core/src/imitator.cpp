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

#include "adaptpoint/imitator.hpp"

#include "adaptpoint/nn/gumbel.hpp"
#include "adaptpoint/nn/ops.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace adaptpoint {

void ImitatorConfig::validate() const {
  if (num_anchors == 0 || num_anchors > num_sampled || num_sampled > num_points) {
    throw std::invalid_argument("imitator config: need 1 <= M <= N' <= N");
  }
  if (neighbors == 0 || neighbors > num_sampled) throw std::invalid_argument("imitator config: need 1 <= K <= N'");
  if (num_sampled < 3) throw std::invalid_argument("imitator config: N' must be at least 3");
  if (heads <= 0 || width <= 0 || width % heads != 0) {
    throw std::invalid_argument("imitator config: width must be a positive multiple of heads");
  }
  if (!(scale_max > 1.0)) throw std::invalid_argument("imitator config: s_max must exceed 1");
  if (!(rotation_max > 0.0) || !(translation_max > 0.0)) {
    throw std::invalid_argument("imitator config: rotation and translation bounds must be positive");
  }
  if (!(tau > 0.0)) throw std::invalid_argument("imitator config: tau must be positive");
  if (!(mask_budget >= 0.0 && mask_budget <= 1.0)) {
    throw std::invalid_argument("imitator config: mask budget must lie in [0, 1]");
  }
  if (!(fusion_bandwidth > 0.0)) throw std::invalid_argument("imitator config: bandwidth must be positive");
}

DeformationParams ImitatorTrace::params() const {
  return {raw_scale.value(), raw_rotation.value(), raw_translation.value(),
          scale.value(),     rotation.value(),     translation.value()};
}

PointMask ImitatorTrace::point_mask() const {
  if (!mask.valid()) return PointMask::keep_all(output.rows());
  return {Eigen::VectorXd(mask.value().col(0)), true};
}

Imitator::Imitator(const ImitatorConfig& cfg, RngStream& rng) : cfg_(cfg) {
  cfg_.validate();
  const Eigen::Index c = cfg_.width;
  const nn::Init head_init = cfg_.zero_init_heads ? nn::Init::kZero : nn::Init::kUniform;
  extractor_ = nn::Mlp(store_, "imitator.extractor", {6, c, c}, rng, true);
  anchor_mlp_ = nn::Mlp(store_, "imitator.deform.phi", {c, c, c}, rng, true);
  anchor_attn_ = nn::MultiHeadAttention(store_, "imitator.deform.attn", c, cfg_.heads, rng);
  anchor_global_ = nn::Mlp(store_, "imitator.deform.global", {c, c}, rng, true);
  head_scale_ = nn::Mlp(store_, "imitator.deform.scale", {2 * c, c, 3}, rng, false, head_init);
  head_rotation_ = nn::Mlp(store_, "imitator.deform.rotation", {2 * c, c, 3}, rng, false, head_init);
  head_translation_ = nn::Mlp(store_, "imitator.deform.translation", {2 * c, c, 3}, rng, false, head_init);
  point_attn_ = nn::MultiHeadAttention(store_, "imitator.mask.attn", c, cfg_.heads, rng);
  point_global_ = nn::Mlp(store_, "imitator.mask.global", {c, c}, rng, true);
  head_mask_ = nn::Mlp(store_, "imitator.mask.head", {2 * c, c, 2}, rng, false, head_init);
}

std::pair<Matrix, nn::Var> Imitator::extract_features(nn::Graph& g, const Matrix& cloud, std::size_t start) const {
  const std::size_t k = cfg_.neighbors;
  if (static_cast<std::size_t>(cloud.rows()) < cfg_.num_sampled) {
    throw std::invalid_argument("extract_features: cloud has " + std::to_string(cloud.rows()) +
                                " points, fewer than N' = " + std::to_string(cfg_.num_sampled));
  }
  const std::vector<int> centers = fps(cloud, cfg_.num_sampled, start);
  Matrix sampled = take_rows(cloud, centers);
  const IndexMatrix nbr = knn(sampled, cloud, k);
  Matrix grouped(sampled.rows() * static_cast<Eigen::Index>(k), 6);
  for (Eigen::Index c = 0; c < sampled.rows(); ++c) {
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(k); ++j) {
      const Eigen::Index r = c * static_cast<Eigen::Index>(k) + j;
      grouped.block(r, 0, 1, 3) = cloud.row(nbr(c, j)) - sampled.row(c);
      grouped.block(r, 3, 1, 3) = sampled.row(c);
    }
  }
  nn::Var feats = nn::max_pool_groups(extractor_(g, g.constant(std::move(grouped))), static_cast<Eigen::Index>(k));
  return {std::move(sampled), feats};
}

Matrix Imitator::select_anchors(const Matrix& cloud) const {
  const std::vector<int> idx = fps(cloud, cfg_.num_anchors, 0);
  return take_rows(cloud, idx);
}

nn::Var Imitator::aggregate_anchor_features(nn::Graph& g, const Matrix& anchors, const Matrix& sampled,
                                            nn::Var features) const {
  const IndexMatrix nbr = knn(anchors, sampled, cfg_.neighbors);
  std::vector<int> flat(nbr.data(), nbr.data() + nbr.size());
  const nn::Var grouped = nn::gather_rows(features, std::move(flat));
  return nn::max_pool_groups(anchor_mlp_(g, grouped), nbr.cols());
}

nn::Var Imitator::cross_anchor_interaction(nn::Graph& g, nn::Var h, const Matrix& anchors) const {
  return anchor_attn_(g, h, g.constant(anchors));
}

nn::Var Imitator::global_anchor_feature(nn::Graph& g, nn::Var h) const {
  return nn::max_rows(anchor_global_(g, h));
}

Imitator::DeformationNodes Imitator::predict_deformation(nn::Graph& g, nn::Var h_prime, nn::Var global) const {
  const std::vector<nn::Var> parts{h_prime, nn::broadcast_rows(global, h_prime.rows())};
  const nn::Var x = nn::concat_cols(parts);
  DeformationNodes d;
  d.raw_scale = nn::sigmoid(head_scale_(g, x));
  d.raw_rotation = nn::tanh(head_rotation_(g, x));
  d.raw_translation = nn::tanh(head_translation_(g, x));
  const double log_s = std::log(cfg_.scale_max);
  // s_max^(2u - 1); u = 0.5 gives exp(0) = 1 exactly
  d.scale = nn::exp(nn::affine(d.raw_scale, 2.0 * log_s, -log_s));
  d.rotation = nn::scale(d.raw_rotation, cfg_.rotation_max);
  d.translation = nn::scale(d.raw_translation, cfg_.translation_max);
  return d;
}

nn::Var Imitator::upsample_point_features(nn::Graph&, nn::Var features, const Matrix& sampled,
                                          const Matrix& cloud) const {
  IdwWeights w = idw_weights(sampled, cloud, 3);
  return nn::weighted_gather(features, std::move(w.index), std::move(w.weight));
}

nn::Var Imitator::cross_point_interaction(nn::Graph& g, nn::Var e, const Matrix& cloud) const {
  return point_attn_(g, e, g.constant(cloud));
}

nn::Var Imitator::global_point_feature(nn::Graph& g, nn::Var e) const {
  return nn::max_rows(point_global_(g, e));
}

nn::Var Imitator::mask_logits(nn::Graph& g, nn::Var e_prime, nn::Var z) const {
  const std::vector<nn::Var> parts{e_prime, nn::broadcast_rows(z, e_prime.rows())};
  return head_mask_(g, nn::concat_cols(parts));
}

std::pair<nn::Var, nn::Var> Imitator::predict_mask(nn::Var logits, const Matrix& noise, bool hard) const {
  const nn::Var probs = nn::gumbel_softmax(logits, noise, cfg_.tau, false);
  const nn::Var soft_keep = nn::slice_cols(probs, 0, 1);
  if (!hard) return {soft_keep, probs};

  const Matrix& p = probs.value();
  const Eigen::Index n = p.rows();
  Matrix keep(n, 1);
  std::vector<int> dropped;
  for (Eigen::Index i = 0; i < n; ++i) {
    // ties go to keep
    keep(i, 0) = p(i, 0) >= p(i, 1) ? 1.0 : 0.0;
    if (keep(i, 0) == 0.0) dropped.push_back(static_cast<int>(i));
  }
  const auto budget = static_cast<std::size_t>(std::floor(cfg_.mask_budget * static_cast<double>(n)));
  if (dropped.size() > budget) {
    std::stable_sort(dropped.begin(), dropped.end(), [&](int a, int b) { return p(a, 0) < p(b, 0); });
    for (std::size_t i = budget; i < dropped.size(); ++i) keep(dropped[i], 0) = 1.0;
  }
  return {nn::straight_through(soft_keep, std::move(keep)), probs};
}

ImitatorTrace Imitator::forward(nn::Graph& g, const Matrix& cloud, RngStream& rng, const ImitateOptions& opts) const {
  if (static_cast<std::size_t>(cloud.rows()) != cfg_.num_points || cloud.cols() != 3) {
    throw std::invalid_argument("imitator: expected " + std::to_string(cfg_.num_points) + " x 3 points, got " +
                                std::to_string(cloud.rows()) + " x " + std::to_string(cloud.cols()));
  }
  // drawn unconditionally so the stream advances the same way under every ablation
  const Matrix noise = nn::gumbel_noise(cloud.rows(), 2, rng);

  ImitatorTrace t;
  auto [sampled, feats] = extract_features(g, cloud);
  t.sampled = std::move(sampled);
  t.features = feats;
  t.anchors = select_anchors(cloud);

  const nn::Var h = aggregate_anchor_features(g, t.anchors, t.sampled, feats);
  const nn::Var h_prime = cross_anchor_interaction(g, h, t.anchors);
  const DeformationNodes d = predict_deformation(g, h_prime, global_anchor_feature(g, h));
  t.raw_scale = d.raw_scale;
  t.raw_rotation = d.raw_rotation;
  t.raw_translation = d.raw_translation;
  t.scale = d.scale;
  t.rotation = d.rotation;
  t.translation = d.translation;

  nn::Var fused;
  if (opts.use_deformation) {
    const auto disp = sim::per_anchor_displacement(g, cloud, t.anchors, d.scale, d.rotation, d.translation);
    const sim::FusionWeights w = sim::fusion_weights(cloud, t.anchors, {cfg_.fusion_bandwidth});
    t.fallback_points = w.fallback_points;
    fused = sim::fuse_displacements(g, cloud, disp, w.weight);
  } else {
    fused = g.constant(cloud);
  }

  if (opts.use_mask && !opts.keep_all) {
    const nn::Var e = upsample_point_features(g, feats, t.sampled, cloud);
    const nn::Var e_prime = cross_point_interaction(g, e, cloud);
    const nn::Var logits = mask_logits(g, e_prime, global_point_feature(g, e));
    std::tie(t.mask, t.mask_probs) = predict_mask(logits, noise, opts.hard_mask);
    t.output = sim::apply_mask(fused, t.mask);
  } else {
    t.output = fused;
  }
  return t;
}

ImitateResult Imitator::imitate(const PointCloud& cloud, RngStream& rng, const ImitateOptions& opts) const {
  nn::Graph g;
  g.freeze("");
  const ImitatorTrace t = forward(g, cloud.points, rng, opts);
  ImitateResult r{PointCloud(t.output.value(), cloud.label), t.params(), t.point_mask()};
  if (!t.mask.valid()) r.mask = PointMask::keep_all(cloud.points.rows());
  else r.mask.hard = opts.hard_mask;
  return r;
}

}  // namespace adaptpoint
