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
#include "adaptpoint/nn/gradcheck.hpp"
#include "adaptpoint/nn/ops.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

namespace adaptpoint {
namespace {

ClassifierConfig small_config() {
  ClassifierConfig cfg;
  cfg.num_points = 64;
  cfg.centers1 = 32;
  cfg.centers2 = 8;
  return cfg;
}

Matrix permute(const Matrix& m, const std::vector<std::size_t>& perm) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < perm.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(perm[i]));
  return out;
}

TEST(ClassifierConfig, Validation) {
  ClassifierConfig c;
  EXPECT_NO_THROW(c.validate());
  c.centers2 = c.centers1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.centers1 = c.num_points + 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.num_classes = 1;
  RngStream init(0, 0);
  EXPECT_THROW(PointClassifier(c, init), std::invalid_argument);
}

TEST(Classifier, LogitsHaveOneEntryPerClass) {
  RngStream init(1, 0);
  const PointClassifier clf(ClassifierConfig{}, init);
  const Eigen::RowVectorXd l = clf.logits(test::random_points(256, 1));
  EXPECT_EQ(l.size(), 6);
  EXPECT_TRUE(l.allFinite());
  const int p = clf.predict(test::random_points(256, 1));
  EXPECT_GE(p, 0);
  EXPECT_LT(p, 6);
}

TEST(Classifier, WrongPointCountThrows) {
  RngStream init(2, 0);
  const PointClassifier clf(small_config(), init);
  EXPECT_THROW(clf.logits(test::random_points(63, 2)), std::invalid_argument);
  EXPECT_THROW(clf.logits(test::random_points(65, 2)), std::invalid_argument);
}

TEST(Classifier, PermutationInvariant) {
  RngStream init(3, 0);
  const PointClassifier clf(small_config(), init);
  const Matrix p = test::random_points(64, 3);
  const Eigen::RowVectorXd ref = clf.logits(p);
  RngStream rng(3, 1);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    worst = std::max(worst, (clf.logits(permute(p, rng.permutation(64))) - ref).cwiseAbs().maxCoeff());
  }
  EXPECT_LE(worst, 1e-5);
}

TEST(Classifier, GradcheckThroughCrossEntropy) {
  RngStream init(4, 0);
  PointClassifier clf(small_config(), init);
  const Matrix cloud = test::random_points(64, 4);
  const BackboneIndices idx = clf.indices(cloud);
  const std::vector<int> label{2};
  const nn::GradcheckReport r = nn::gradcheck(
      [&](nn::Graph& g) { return nn::cross_entropy(clf.forward(g, g.constant(cloud), &idx), label); },
      clf.parameters().all());
  EXPECT_LE(r.max_rel_error, 1e-5) << r.worst;
}

TEST(Discriminator, OutputIsAProbability) {
  RngStream init(5, 0);
  const Discriminator d(small_config(), init);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const double p = d.probability(test::random_points(64, 5, s));
    EXPECT_GT(p, 0.05);
    EXPECT_LT(p, 0.95);
  }
  EXPECT_THROW(d.probability(test::random_points(10, 5)), std::invalid_argument);
}

TEST(Discriminator, PermutationInvariant) {
  RngStream init(6, 0);
  const Discriminator d(small_config(), init);
  const Matrix p = test::random_points(64, 6);
  const double ref = d.probability(p);
  RngStream rng(6, 1);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) worst = std::max(worst, std::abs(d.probability(permute(p, rng.permutation(64))) - ref));
  EXPECT_LE(worst, 1e-5);
}

TEST(Discriminator, Gradcheck) {
  RngStream init(7, 0);
  Discriminator d(small_config(), init);
  const Matrix cloud = test::random_points(64, 7);
  const BackboneIndices idx = d.indices(cloud);
  const nn::GradcheckReport r =
      nn::gradcheck([&](nn::Graph& g) { return d.forward(g, g.constant(cloud), &idx); }, d.parameters().all());
  EXPECT_LE(r.max_rel_error, 1e-5) << r.worst;
}

TEST(Models, ParameterPrefixes) {
  RngStream init(8, 0);
  const PointClassifier clf(small_config(), init);
  const Discriminator d(small_config(), init);
  for (const nn::Parameter* p : clf.parameters().all()) EXPECT_EQ(p->name.rfind("classifier.", 0), 0u) << p->name;
  for (const nn::Parameter* p : d.parameters().all()) EXPECT_EQ(p->name.rfind("discriminator.", 0), 0u) << p->name;
}

TEST(Models, InitIsSeeded) {
  RngStream a(9, 0);
  RngStream b(9, 0);
  RngStream c(10, 0);
  const PointClassifier x(small_config(), a);
  const PointClassifier y(small_config(), b);
  const PointClassifier z(small_config(), c);
  const Matrix p = test::random_points(64, 9);
  EXPECT_TRUE(x.logits(p) == y.logits(p));
  EXPECT_FALSE(x.logits(p) == z.logits(p));
}

}  // namespace
}  // namespace adaptpoint
