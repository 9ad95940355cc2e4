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

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace adaptpoint {

/// Row-major dense matrix of doubles; the storage type for point sets,
/// features and every tensor in the differentiable layer.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using IndexMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// An ordered set of 3-D points with an optional class label.
///
/// Points are rows of an N x 3 matrix. A valid cloud has at least one point
/// and only finite coordinates; `validate()` checks both.
struct PointCloud {
  Matrix points;
  std::optional<int> label;

  PointCloud() : points(0, 3) {}
  explicit PointCloud(Matrix pts, std::optional<int> lbl = std::nullopt)
      : points(std::move(pts)), label(lbl) {}

  std::size_t size() const noexcept { return static_cast<std::size_t>(points.rows()); }
  bool empty() const noexcept { return points.rows() == 0; }
  Vec3 point(std::size_t i) const { return points.row(static_cast<Eigen::Index>(i)).transpose(); }

  /// Throws std::invalid_argument on an empty cloud, a non-3 column count,
  /// or a non-finite coordinate.
  void validate() const;
};

/// Rotation angles in radians about the x, y and z axes.
struct EulerAngles {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
};

/// Greedy farthest point sampling. The first index is `start`; each next
/// index maximizes the minimum distance to the already selected points,
/// ties going to the lowest index.
std::vector<int> fps(const Matrix& points, std::size_t m, std::size_t start = 0);

/// Order-independent FPS start: the point farthest from the centroid, ties
/// broken by lexicographic coordinate order. Used where a network must be
/// invariant to the order of its input points.
std::size_t canonical_start(const Matrix& points);

/// For each query row, the indices of the k nearest reference rows sorted by
/// ascending distance, ties by lowest index.
IndexMatrix knn(const Matrix& queries, const Matrix& reference, std::size_t k);

/// R = Rz(gamma) * Ry(beta) * Rx(alpha), acting on column vectors.
Mat3 euler_to_rotation(const EulerAngles& angles);

/// Centers the cloud at its centroid and scales it so the largest point norm
/// is 1. A cloud whose points all coincide is only centered.
PointCloud normalize_unit_sphere(const PointCloud& cloud);

/// Neighbor indices and normalized inverse-distance weights for interpolating
/// source features onto destination points.
struct IdwWeights {
  IndexMatrix index;  // dst x k
  Matrix weight;      // dst x k, rows sum to 1
};

inline constexpr double kIdwEpsilon = 1e-8;

IdwWeights idw_weights(const Matrix& src_pts, const Matrix& dst_pts, std::size_t k = 3,
                       double eps = kIdwEpsilon);

/// Inverse-distance interpolation: w_j = 1 / (d_j + eps) over the k nearest
/// source points, normalized to sum to 1.
Matrix idw_interpolate(const Matrix& src_pts, const Matrix& src_feats, const Matrix& dst_pts,
                       std::size_t k = 3, double eps = kIdwEpsilon);

/// Gathers rows by index.
Matrix take_rows(const Matrix& m, std::span<const int> rows);

}  // namespace adaptpoint
