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

#include "adaptpoint/nn/layers.hpp"
#include "adaptpoint/rng.hpp"

#include <string>
#include <vector>

namespace adaptpoint {

/// Two set-abstraction stages followed by a global max-pool and an MLP head.
struct ClassifierConfig {
  std::size_t num_points = 256;
  std::size_t centers1 = 128;
  std::size_t centers2 = 32;
  std::size_t neighbors = 8;
  Eigen::Index width1 = 32;
  Eigen::Index width2 = 64;
  Eigen::Index head_hidden = 32;
  Eigen::Index num_classes = 6;

  void validate() const;
};

/// Sampling and grouping indices of both stages. They depend only on point
/// coordinates and enter the graph as constants.
struct BackboneIndices {
  std::vector<int> centers1;
  IndexMatrix neighbors1;  // centers1 x K, into the input points
  std::vector<int> centers2;
  IndexMatrix neighbors2;  // centers2 x K, into the stage-one centers
};

/// Shared point encoder. Stage one groups (relative xyz, center xyz); stage
/// two groups (relative xyz, stage-one feature). FPS starts from an
/// order-independent point so the output ignores input order.
class SetAbstractionBackbone {
 public:
  SetAbstractionBackbone() = default;
  SetAbstractionBackbone(nn::ParameterStore& store, const std::string& name, const ClassifierConfig& cfg,
                         RngStream& rng);

  BackboneIndices indices(const Matrix& points) const;

  /// [N x 3] -> [1 x width2] after layer norm. With `fixed`, those indices
  /// replace the ones computed from the points.
  nn::Var operator()(nn::Graph& g, nn::Var points, const BackboneIndices* fixed = nullptr) const;

 private:
  ClassifierConfig cfg_;
  nn::Mlp stage1_;
  nn::Mlp stage2_;
  nn::LayerNorm norm_;
};

/// Parameters live under `classifier.`.
class PointClassifier {
 public:
  PointClassifier(const ClassifierConfig& cfg, RngStream& init_rng);

  /// [N x 3] -> logits [1 x K]. Throws std::invalid_argument for the wrong N.
  nn::Var forward(nn::Graph& g, nn::Var points, const BackboneIndices* fixed = nullptr) const;
  BackboneIndices indices(const Matrix& points) const { return backbone_.indices(points); }
  /// Logits of a plain cloud.
  Eigen::RowVectorXd logits(const Matrix& points) const;
  int predict(const Matrix& points) const;

  const ClassifierConfig& config() const { return cfg_; }
  nn::ParameterStore& parameters() { return store_; }
  const nn::ParameterStore& parameters() const { return store_; }

 private:
  ClassifierConfig cfg_;
  nn::ParameterStore store_;
  SetAbstractionBackbone backbone_;
  nn::Mlp head_;
};

/// Same backbone with a sigmoid scalar head: the probability that a cloud is
/// clean. Parameters live under `discriminator.`.
class Discriminator {
 public:
  Discriminator(const ClassifierConfig& cfg, RngStream& init_rng);

  /// [N x 3] -> probability [1 x 1].
  nn::Var forward(nn::Graph& g, nn::Var points, const BackboneIndices* fixed = nullptr) const;
  BackboneIndices indices(const Matrix& points) const { return backbone_.indices(points); }
  double probability(const Matrix& points) const;

  nn::ParameterStore& parameters() { return store_; }
  const nn::ParameterStore& parameters() const { return store_; }

 private:
  ClassifierConfig cfg_;
  nn::ParameterStore store_;
  SetAbstractionBackbone backbone_;
  nn::Mlp head_;
};

}  // namespace adaptpoint
