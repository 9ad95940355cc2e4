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

#include "svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace adaptpoint::cli {

namespace {

struct Axes {
  int u, v, depth;
};

Axes axes(View view) {
  switch (view) {
    case View::kXY: return {0, 1, 2};
    case View::kXZ: return {0, 2, 1};
    case View::kYZ: return {1, 2, 0};
  }
  throw std::invalid_argument("bad view");
}

// Blue (0) through white to red (1).
std::string color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const std::array<double, 3> lo{0.23, 0.30, 0.75};
  const std::array<double, 3> mid{0.87, 0.87, 0.87};
  const std::array<double, 3> hi{0.71, 0.02, 0.15};
  const auto& a = t < 0.5 ? lo : mid;
  const auto& b = t < 0.5 ? mid : hi;
  const double s = t < 0.5 ? 2.0 * t : 2.0 * t - 1.0;
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(255 * (a[0] + s * (b[0] - a[0])))),
                static_cast<int>(std::lround(255 * (a[1] + s * (b[1] - a[1])))),
                static_cast<int>(std::lround(255 * (a[2] + s * (b[2] - a[2])))));
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

View parse_view(std::string_view name) {
  if (name == "xy") return View::kXY;
  if (name == "xz") return View::kXZ;
  if (name == "yz") return View::kYZ;
  throw std::invalid_argument("unknown view '" + std::string(name) + "' (expected xy, xz or yz)");
}

std::string_view view_name(View v) {
  switch (v) {
    case View::kXY: return "xy";
    case View::kXZ: return "xz";
    case View::kYZ: return "yz";
  }
  return "?";
}

std::string render_svg(const Matrix& points, View view, const std::optional<Eigen::VectorXd>& values,
                       const RenderOptions& options) {
  if (points.cols() != 3 || points.rows() == 0) throw std::invalid_argument("render_svg: expected a non-empty N x 3 cloud");
  if (values && values->size() != points.rows()) {
    throw std::invalid_argument("render_svg: " + std::to_string(values->size()) + " values for " +
                                std::to_string(points.rows()) + " points");
  }
  const Axes ax = axes(view);
  const Eigen::Index n = points.rows();

  const auto u = points.col(ax.u);
  const auto v = points.col(ax.v);
  const auto d = points.col(ax.depth);
  const double extent = std::max({u.maxCoeff() - u.minCoeff(), v.maxCoeff() - v.minCoeff(), 1e-9});
  const double cu = 0.5 * (u.maxCoeff() + u.minCoeff());
  const double cv = 0.5 * (v.maxCoeff() + v.minCoeff());
  const double margin = 4.0 * options.radius;
  const double scale = (options.size - 2.0 * margin) / extent;
  const double dmin = d.minCoeff();
  const double drange = std::max(d.maxCoeff() - dmin, 1e-12);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return d(a) < d(b); });

  const int sz = options.size;
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + std::to_string(sz) +
         "\" height=\"" + std::to_string(sz) + "\" viewBox=\"0 0 " + std::to_string(sz) + ' ' + std::to_string(sz) +
         "\">\n";
  if (!options.title.empty()) out += "<title>" + escape(options.title) + "</title>\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  char buf[128];
  for (Eigen::Index i : order) {
    const double x = 0.5 * sz + scale * (u(i) - cu);
    const double y = 0.5 * sz - scale * (v(i) - cv);  // SVG y grows downward
    const double t = values ? (*values)(i) : (d(i) - dmin) / drange;
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\" fill=\"%s\"/>\n", x, y,
                  options.radius, color(t).c_str());
    out += buf;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace adaptpoint::cli
