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

#include <optional>
#include <string>
#include <string_view>

namespace adaptpoint::cli {

/// Orthographic projection plane; the remaining axis is the depth.
enum class View { kXY, kXZ, kYZ };

View parse_view(std::string_view name);
std::string_view view_name(View v);

struct RenderOptions {
  int size = 480;  // square canvas, pixels
  double radius = 2.5;
  std::string title;
};

/// Scatter plot of one projection as a standalone SVG 1.1 document. Points
/// are colored by `values` (one per point, clamped to [0, 1]) when given, by
/// normalized depth otherwise, and drawn far-to-near.
std::string render_svg(const Matrix& points, View view, const std::optional<Eigen::VectorXd>& values,
                       const RenderOptions& options = {});

}  // namespace adaptpoint::cli
