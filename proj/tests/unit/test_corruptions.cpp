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

#include "adaptpoint/corruptions.hpp"
#include "adaptpoint/data_io.hpp"
#include "adaptpoint/errors.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

namespace adaptpoint {
namespace {

using Row = std::array<double, 3>;

std::vector<Row> rows(const Matrix& m) {
  std::vector<Row> out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back({m(i, 0), m(i, 1), m(i, 2)});
  std::sort(out.begin(), out.end());
  return out;
}

// Multiset inclusion of exact rows.
bool is_sub_multiset(const Matrix& small, const Matrix& big) {
  const std::vector<Row> a = rows(small);
  const std::vector<Row> b = rows(big);
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

PointCloud sample_cloud(std::size_t i, std::size_t n = 256) {
  SyntheticConfig cfg;
  cfg.num_points = n;
  return synthesize_sample(cfg, i % cfg.classes.size(), i);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Nearest-neighbor sums written out directly.
double chamfer_oracle(const Matrix& a, const Matrix& b) {
  auto one_way = [](const Matrix& x, const Matrix& y) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      double best = INFINITY;
      for (Eigen::Index j = 0; j < y.rows(); ++j) best = std::min(best, (x.row(i) - y.row(j)).norm());
      total += best;
    }
    return total / static_cast<double>(x.rows());
  };
  return 0.5 * (one_way(a, b) + one_way(b, a));
}

TEST(SeverityTable, DefaultsFollowTheCalibration) {
  const SeverityTable t;
  EXPECT_NO_THROW(t.validate());
  for (int l = 1; l <= 5; ++l) {
    const auto i = static_cast<std::size_t>(l - 1);
    EXPECT_DOUBLE_EQ(t.scale_bound[i], 1.0 + 0.2 * l);
    EXPECT_DOUBLE_EQ(t.jitter_sigma[i], 0.01 * l);
    EXPECT_DOUBLE_EQ(t.rotate_deg[i], 15.0 * l);
    EXPECT_DOUBLE_EQ(t.drop_global_frac[i], 0.125 + 0.125 * l);
    EXPECT_DOUBLE_EQ(t.drop_local_frac[i], 0.05 * l * 1.5);
    EXPECT_DOUBLE_EQ(t.drop_local_centers[i], std::min(8, l + 1));
    EXPECT_DOUBLE_EQ(t.add_global_frac[i], 0.1 * l);
    EXPECT_DOUBLE_EQ(t.add_local_frac[i], 0.1 * l);
  }
}

TEST(SeverityTable, RejectsNonMonotoneRows) {
  SeverityTable t;
  t.jitter_sigma[3] = t.jitter_sigma[2];
  EXPECT_THROW(t.validate(), std::invalid_argument);
}

TEST(Corruption, RejectsSeverityOutOfRange) {
  const PointCloud c = sample_cloud(0);
  RngStream rng(1, 1);
  EXPECT_THROW(apply_corruption(c, {Family::kJitter, 0}, rng), std::invalid_argument);
  EXPECT_THROW(apply_corruption(c, {Family::kJitter, 6}, rng), std::invalid_argument);
}

TEST(Corruption, ZeroJitterIsIdentity) {
  const PointCloud c = sample_cloud(1);
  SeverityTable t;
  t.jitter_sigma.fill(0.0);
  RngStream rng(1, 2);
  EXPECT_TRUE(apply_corruption(c, {Family::kJitter, 3}, rng, t).points == c.points);
}

TEST(Corruption, DropGlobalHalvesTheCloud) {
  const PointCloud c = sample_cloud(2, 1024);
  RngStream rng(1, 3);
  const PointCloud out = apply_corruption(c, {Family::kDropGlobal, 3}, rng);
  EXPECT_EQ(out.size(), 512u);
  EXPECT_TRUE(is_sub_multiset(out.points, c.points));
}

TEST(Corruption, ScaleFactorsAreRecoverable) {
  const PointCloud c = sample_cloud(3);
  for (int l = 1; l <= 5; ++l) {
    RngStream rng(1, static_cast<std::uint64_t>(l));
    const PointCloud out = apply_corruption(c, {Family::kScale, l}, rng);
    ASSERT_EQ(out.size(), c.size());
    const double s = 1.0 + 0.2 * l;
    for (int axis = 0; axis < 3; ++axis) {
      Eigen::Index ref = 0;
      c.points.col(axis).cwiseAbs().maxCoeff(&ref);
      const double factor = out.points(ref, axis) / c.points(ref, axis);
      EXPECT_GE(factor, 1.0 / s - 1e-12);
      EXPECT_LE(factor, s + 1e-12);
      for (Eigen::Index i = 0; i < c.points.rows(); ++i) {
        if (std::abs(c.points(i, axis)) < 1e-6) continue;
        EXPECT_NEAR(out.points(i, axis) / c.points(i, axis), factor, 1e-9);
      }
    }
  }
}

TEST(Corruption, RotatePreservesPairwiseDistances) {
  const PointCloud c = sample_cloud(4, 64);
  RngStream rng(1, 4);
  const PointCloud out = apply_corruption(c, {Family::kRotate, 5}, rng);
  ASSERT_EQ(out.size(), c.size());
  for (Eigen::Index i = 0; i < 64; ++i) {
    for (Eigen::Index j = i + 1; j < 64; ++j) {
      EXPECT_NEAR((out.points.row(i) - out.points.row(j)).norm(), (c.points.row(i) - c.points.row(j)).norm(), 1e-9);
    }
  }
}

TEST(Corruption, DropAndAddRespectMultisetInclusion) {
  const PointCloud c = sample_cloud(5);
  for (int l = 1; l <= 5; ++l) {
    for (Family f : {Family::kDropGlobal, Family::kDropLocal}) {
      RngStream rng(2, corruption_stream(5, f, l));
      const PointCloud out = apply_corruption(c, {f, l}, rng);
      EXPECT_LT(out.size(), c.size());
      EXPECT_TRUE(is_sub_multiset(out.points, c.points)) << family_name(f) << " " << l;
    }
    for (Family f : {Family::kAddGlobal, Family::kAddLocal}) {
      RngStream rng(2, corruption_stream(5, f, l));
      const PointCloud out = apply_corruption(c, {f, l}, rng);
      EXPECT_EQ(out.size(), c.size() + static_cast<std::size_t>(std::floor(256 * 0.1 * l)));
      EXPECT_TRUE(is_sub_multiset(c.points, out.points)) << family_name(f) << " " << l;
      const Matrix added = out.points.bottomRows(out.points.rows() - c.points.rows());
      const double radius = f == Family::kAddGlobal ? 1.0 : 1.1;
      EXPECT_LE(added.rowwise().norm().maxCoeff(), radius + 1e-12);
    }
  }
}

TEST(Corruption, DropCountsFollowTheTable) {
  const PointCloud c = sample_cloud(6);
  for (int l = 1; l <= 5; ++l) {
    RngStream a(3, 1);
    EXPECT_EQ(apply_corruption(c, {Family::kDropGlobal, l}, a).size(),
              256u - static_cast<std::size_t>(std::floor(256 * (0.125 + 0.125 * l))));
    RngStream b(3, 2);
    EXPECT_EQ(apply_corruption(c, {Family::kDropLocal, l}, b).size(),
              256u - static_cast<std::size_t>(std::floor(256 * 0.05 * l * 1.5)));
  }
}

TEST(Corruption, PureFunctionOfInputs) {
  const PointCloud c = sample_cloud(7);
  for (Family f : kAllFamilies) {
    RngStream a(9, 9);
    RngStream b(9, 9);
    EXPECT_TRUE(apply_corruption(c, {f, 3}, a).points == apply_corruption(c, {f, 3}, b).points);
  }
}

TEST(Corruption, OutputsAreFinite) {
  for (std::size_t i = 0; i < 6; ++i) {
    const PointCloud c = sample_cloud(i);
    for (Family f : kAllFamilies) {
      for (int l = 1; l <= 5; ++l) {
        RngStream rng(4, corruption_stream(i, f, l));
        EXPECT_NO_THROW(apply_corruption(c, {f, l}, rng).validate());
      }
    }
  }
}

TEST(Corruption, MeanChamferGrowsWithSeverity) {
  constexpr std::size_t kSamples = 50;
  std::vector<PointCloud> clouds;
  for (std::size_t i = 0; i < kSamples; ++i) clouds.push_back(sample_cloud(i));
  for (Family f : kAllFamilies) {
    double previous = 0.0;
    for (int l = 1; l <= 5; ++l) {
      double mean = 0.0;
      for (std::size_t i = 0; i < kSamples; ++i) {
        RngStream rng(11, corruption_stream(i, f, l));
        mean += chamfer_distance(clouds[i], apply_corruption(clouds[i], {f, l}, rng));
      }
      mean /= kSamples;
      EXPECT_GE(mean, previous) << family_name(f) << " severity " << l;
      previous = mean;
    }
  }
}

TEST(Chamfer, Examples) {
  const Matrix a = test::random_points(30, 1);
  EXPECT_EQ(chamfer_distance(PointCloud(a), PointCloud(a)), 0.0);
  Matrix p = Matrix::Zero(1, 3);
  Matrix q = Matrix::Zero(1, 3);
  q(0, 0) = 1.0;
  EXPECT_DOUBLE_EQ(chamfer_distance(PointCloud(p), PointCloud(q)), 1.0);
  EXPECT_THROW(chamfer_distance(PointCloud(), PointCloud(q)), std::invalid_argument);
}

TEST(Chamfer, SymmetricAndMatchesOracle) {
  for (std::uint64_t t = 0; t < 10; ++t) {
    const Matrix a = test::random_points(20 + static_cast<Eigen::Index>(t), 2, t);
    const Matrix b = test::random_points(35, 3, t);
    const double ab = chamfer_distance(PointCloud(a), PointCloud(b));
    EXPECT_NEAR(ab, chamfer_distance(PointCloud(b), PointCloud(a)), 1e-12);
    EXPECT_NEAR(ab, chamfer_oracle(a, b), 1e-12);
  }
}

TEST(Family, NamesRoundTrip) {
  for (Family f : kAllFamilies) {
    EXPECT_EQ(parse_family(family_name(f)), f);
    EXPECT_EQ(parse_family(family_label(f)), f);
  }
  EXPECT_THROW(parse_family("blur"), std::invalid_argument);
}

TEST(Suite, CountsFilesAndReplaysByteIdentically) {
  std::vector<PointCloud> data;
  for (std::size_t i = 0; i < 10; ++i) data.push_back(sample_cloud(i, 128));
  test::TempDir a("suite-a");
  test::TempDir b("suite-b");
  const SuiteManifest ma = build_suite(data, a.path(), 77);
  SuiteOptions parallel;
  parallel.threads = 4;
  const SuiteManifest mb = build_suite(data, b.path(), 77, parallel);
  ASSERT_EQ(ma.records.size(), 350u);
  EXPECT_EQ(ma.encode(), mb.encode());
  EXPECT_EQ(slurp(a.path() / kSuiteManifestName), ma.encode());
  std::size_t files = 0;
  for (const auto& e : std::filesystem::recursive_directory_iterator(a.path())) files += e.is_regular_file() ? 1 : 0;
  EXPECT_EQ(files, 351u);
  for (const SuiteRecord& r : ma.records) {
    ASSERT_EQ(slurp(a.path() / r.path), slurp(b.path() / r.path)) << r.path;
    EXPECT_EQ(read_cloud(a.path() / r.path).size(), r.point_count);
  }
}

TEST(Suite, DifferentSeedsDiffer) {
  std::vector<PointCloud> data{sample_cloud(0, 128)};
  test::TempDir a("seed-a");
  test::TempDir b("seed-b");
  SuiteOptions opts;
  opts.families = {Family::kJitter};
  opts.severities = {2};
  const SuiteManifest m = build_suite(data, a.path(), 1, opts);
  build_suite(data, b.path(), 2, opts);
  ASSERT_EQ(m.records.size(), 1u);
  EXPECT_NE(slurp(a.path() / m.records[0].path), slurp(b.path() / m.records[0].path));
}

TEST(Suite, ManifestRoundTripAndErrors) {
  SuiteManifest m;
  m.seed = 12345678901234ULL;
  m.records.push_back({"jitter/1/000000.pcb", Family::kJitter, 1, 0, 256});
  m.records.push_back({"add_local/5/000003.pcb", Family::kAddLocal, 5, 3, 384});
  const SuiteManifest back = SuiteManifest::decode(m.encode());
  EXPECT_EQ(back.seed, m.seed);
  EXPECT_EQ(back.encode(), m.encode());
  EXPECT_THROW(SuiteManifest::decode(""), ParseError);
  EXPECT_THROW(SuiteManifest::decode("ADAPTPOINT-SUITE v1 seed=1\nx.pcb jitter 9 0 10\n"), ParseError);
  EXPECT_THROW(build_suite({}, "unused", 1), std::invalid_argument);
}

}  // namespace
}  // namespace adaptpoint
