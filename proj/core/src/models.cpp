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

#include "adaptpoint/models.hpp"

#include <stdexcept>

namespace adaptpoint {

void ClassifierConfig::validate() const {
  if (!(centers1 > centers2 && centers2 > 0)) throw std::invalid_argument("classifier config: centers must decrease");
  if (centers1 > num_points) throw std::invalid_argument("classifier config: more centers than points");
  if (neighbors == 0 || neighbors > centers2) throw std::invalid_argument("classifier config: bad neighbor count");
  if (num_classes < 1) throw std::invalid_argument("classifier config: need at least one output");
  if (width1 <= 0 || width2 <= 0 || head_hidden <= 0) throw std::invalid_argument("classifier config: bad widths");
}

namespace {

void check_points(const nn::Var& points, std::size_t n) {
  if (static_cast<std::size_t>(points.rows()) != n || points.cols() != 3) {
    throw std::invalid_argument("model expects " + std::to_string(n) + " x 3 points, got " +
                                std::to_string(points.rows()) + " x " + std::to_string(points.cols()));
  }
}

std::vector<int> flatten(const IndexMatrix& m) { return {m.data(), m.data() + m.size()}; }

std::vector<int> repeat_each(Eigen::Index count, Eigen::Index times) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(count * times));
  for (Eigen::Index i = 0; i < count; ++i) out.insert(out.end(), static_cast<std::size_t>(times), static_cast<int>(i));
  return out;
}

}  // namespace

SetAbstractionBackbone::SetAbstractionBackbone(nn::ParameterStore& store, const std::string& name,
                                               const ClassifierConfig& cfg, RngStream& rng)
    : cfg_(cfg),
      stage1_(store, name + ".sa1", {6, cfg.width1, cfg.width1}, rng, true),
      stage2_(store, name + ".sa2", {3 + cfg.width1, cfg.width2, cfg.width2}, rng, true),
      norm_(store, name + ".norm", cfg.width2) {}

BackboneIndices SetAbstractionBackbone::indices(const Matrix& points) const {
  BackboneIndices idx;
  idx.centers1 = fps(points, cfg_.centers1, canonical_start(points));
  const Matrix c1 = take_rows(points, idx.centers1);
  idx.neighbors1 = knn(c1, points, cfg_.neighbors);
  idx.centers2 = fps(c1, cfg_.centers2, 0);
  idx.neighbors2 = knn(take_rows(c1, idx.centers2), c1, cfg_.neighbors);
  return idx;
}

nn::Var SetAbstractionBackbone::operator()(nn::Graph& g, nn::Var points, const BackboneIndices* fixed) const {
  const auto k = static_cast<Eigen::Index>(cfg_.neighbors);
  const BackboneIndices own = fixed == nullptr ? indices(points.value()) : BackboneIndices{};
  const BackboneIndices& idx = fixed == nullptr ? own : *fixed;

  const nn::Var c1 = nn::gather_rows(points, idx.centers1);
  const nn::Var rep1 = nn::gather_rows(c1, repeat_each(c1.rows(), k));
  const nn::Var rel1 = nn::sub(nn::gather_rows(points, flatten(idx.neighbors1)), rep1);
  const std::vector<nn::Var> in1{rel1, rep1};
  const nn::Var f1 = nn::max_pool_groups(stage1_(g, nn::concat_cols(in1)), k);

  const nn::Var c2 = nn::gather_rows(c1, idx.centers2);
  const std::vector<int> flat2 = flatten(idx.neighbors2);
  const nn::Var rel2 = nn::sub(nn::gather_rows(c1, flat2), nn::gather_rows(c2, repeat_each(c2.rows(), k)));
  const std::vector<nn::Var> in2{rel2, nn::gather_rows(f1, flat2)};
  const nn::Var f2 = nn::max_pool_groups(stage2_(g, nn::concat_cols(in2)), k);

  return norm_(g, nn::max_rows(f2));
}

PointClassifier::PointClassifier(const ClassifierConfig& cfg, RngStream& rng) : cfg_(cfg) {
  cfg_.validate();
  if (cfg_.num_classes < 2) throw std::invalid_argument("classifier config: need at least 2 classes");
  backbone_ = SetAbstractionBackbone(store_, "classifier.backbone", cfg_, rng);
  head_ = nn::Mlp(store_, "classifier.head", {cfg_.width2, cfg_.head_hidden, cfg_.num_classes}, rng, false);
}

nn::Var PointClassifier::forward(nn::Graph& g, nn::Var points, const BackboneIndices* fixed) const {
  check_points(points, cfg_.num_points);
  return head_(g, backbone_(g, points, fixed));
}

Eigen::RowVectorXd PointClassifier::logits(const Matrix& points) const {
  nn::Graph g;
  g.freeze("");
  return forward(g, g.constant(points)).value().row(0);
}

int PointClassifier::predict(const Matrix& points) const {
  const Eigen::RowVectorXd l = logits(points);
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < l.size(); ++i) {
    if (l(i) > l(best)) best = i;
  }
  return static_cast<int>(best);
}

Discriminator::Discriminator(const ClassifierConfig& cfg, RngStream& rng) : cfg_(cfg) {
  cfg_.num_classes = 1;
  cfg_.validate();
  backbone_ = SetAbstractionBackbone(store_, "discriminator.backbone", cfg_, rng);
  head_ = nn::Mlp(store_, "discriminator.head", {cfg_.width2, cfg_.head_hidden, 1}, rng, false);
}

nn::Var Discriminator::forward(nn::Graph& g, nn::Var points, const BackboneIndices* fixed) const {
  check_points(points, cfg_.num_points);
  return nn::sigmoid(head_(g, backbone_(g, points, fixed)));
}

double Discriminator::probability(const Matrix& points) const {
  nn::Graph g;
  g.freeze("");
  return forward(g, g.constant(points)).scalar();
}

}  // namespace adaptpoint
