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

#include "adaptpoint/geom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace adaptpoint {

void PointCloud::validate() const {
  if (points.cols() != 3) throw std::invalid_argument("point cloud must have 3 columns");
  if (points.rows() == 0) throw std::invalid_argument("point cloud is empty");
  if (!points.allFinite()) throw std::invalid_argument("point cloud has non-finite coordinates");
}

namespace {

double squared_distance(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) {
  const double dx = a(i, 0) - b(j, 0);
  const double dy = a(i, 1) - b(j, 1);
  const double dz = a(i, 2) - b(j, 2);
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace

std::vector<int> fps(const Matrix& points, std::size_t m, std::size_t start) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (n == 0) throw std::invalid_argument("fps: empty cloud");
  if (m == 0 || m > n) {
    throw std::invalid_argument("fps: requested " + std::to_string(m) + " samples from " +
                                std::to_string(n) + " points");
  }
  if (start >= n) throw std::invalid_argument("fps: start index out of range");

  std::vector<int> selected;
  selected.reserve(m);
  std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
  std::size_t current = start;
  for (std::size_t s = 0; s < m; ++s) {
    selected.push_back(static_cast<int>(current));
    std::size_t best = 0;
    double best_dist = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = squared_distance(points, static_cast<Eigen::Index>(i), points,
                                        static_cast<Eigen::Index>(current));
      if (d < min_dist[i]) min_dist[i] = d;
      // strict '>' keeps the lowest index on ties
      if (min_dist[i] > best_dist) {
        best_dist = min_dist[i];
        best = i;
      }
    }
    current = best;
  }
  return selected;
}

std::size_t canonical_start(const Matrix& points) {
  if (points.rows() == 0) throw std::invalid_argument("canonical_start: empty cloud");
  const Eigen::RowVector3d centroid = points.colwise().mean();
  std::size_t best = 0;
  double best_dist = -1.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double d = (points.row(i) - centroid).squaredNorm();
    const bool lex_smaller =
        std::lexicographical_compare(points.row(i).data(), points.row(i).data() + 3,
                                     points.row(static_cast<Eigen::Index>(best)).data(),
                                     points.row(static_cast<Eigen::Index>(best)).data() + 3);
    if (d > best_dist || (d == best_dist && lex_smaller)) {
      best_dist = d;
      best = static_cast<std::size_t>(i);
    }
  }
  return best;
}

IndexMatrix knn(const Matrix& queries, const Matrix& reference, std::size_t k) {
  const auto r = static_cast<std::size_t>(reference.rows());
  if (k == 0 || k > r) {
    throw std::invalid_argument("knn: k=" + std::to_string(k) + " with " + std::to_string(r) +
                                " reference points");
  }
  IndexMatrix out(queries.rows(), static_cast<Eigen::Index>(k));
  std::vector<std::pair<double, int>> dist(r);
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    for (std::size_t j = 0; j < r; ++j) {
      dist[j] = {squared_distance(queries, q, reference, static_cast<Eigen::Index>(j)),
                 static_cast<int>(j)};
    }
    // pair ordering compares distance first, then index
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    for (std::size_t j = 0; j < k; ++j) out(q, static_cast<Eigen::Index>(j)) = dist[j].second;
  }
  return out;
}

Mat3 euler_to_rotation(const EulerAngles& angles) {
  const double ca = std::cos(angles.alpha), sa = std::sin(angles.alpha);
  const double cb = std::cos(angles.beta), sb = std::sin(angles.beta);
  const double cg = std::cos(angles.gamma), sg = std::sin(angles.gamma);
  Mat3 rx, ry, rz;
  rx << 1, 0, 0, 0, ca, -sa, 0, sa, ca;
  ry << cb, 0, sb, 0, 1, 0, -sb, 0, cb;
  rz << cg, -sg, 0, sg, cg, 0, 0, 0, 1;
  return rz * ry * rx;
}

PointCloud normalize_unit_sphere(const PointCloud& cloud) {
  if (cloud.empty()) throw std::invalid_argument("normalize_unit_sphere: empty cloud");
  const Eigen::RowVector3d centroid = cloud.points.colwise().mean();
  Matrix centered = cloud.points.rowwise() - centroid;
  const double max_norm = centered.rowwise().norm().maxCoeff();
  if (max_norm > 0.0) centered /= max_norm;
  return PointCloud(std::move(centered), cloud.label);
}

IdwWeights idw_weights(const Matrix& src_pts, const Matrix& dst_pts, std::size_t k, double eps) {
  if (src_pts.rows() == 0) throw std::invalid_argument("idw_interpolate: empty source");
  IdwWeights w;
  w.index = knn(dst_pts, src_pts, k);
  w.weight.resize(dst_pts.rows(), static_cast<Eigen::Index>(k));
  for (Eigen::Index i = 0; i < dst_pts.rows(); ++i) {
    double total = 0.0;
    for (Eigen::Index j = 0; j < w.index.cols(); ++j) {
      const double d = std::sqrt(squared_distance(dst_pts, i, src_pts, w.index(i, j)));
      w.weight(i, j) = 1.0 / (d + eps);
      total += w.weight(i, j);
    }
    w.weight.row(i) /= total;
  }
  return w;
}

Matrix idw_interpolate(const Matrix& src_pts, const Matrix& src_feats, const Matrix& dst_pts,
                       std::size_t k, double eps) {
  if (src_feats.rows() != src_pts.rows()) {
    throw std::invalid_argument("idw_interpolate: feature rows do not match source points");
  }
  const IdwWeights w = idw_weights(src_pts, dst_pts, k, eps);
  Matrix out = Matrix::Zero(dst_pts.rows(), src_feats.cols());
  for (Eigen::Index i = 0; i < dst_pts.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.index.cols(); ++j) {
      out.row(i) += w.weight(i, j) * src_feats.row(w.index(i, j));
    }
  }
  return out;
}

Matrix take_rows(const Matrix& m, std::span<const int> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  }
  return out;
}

}  // namespace adaptpoint
