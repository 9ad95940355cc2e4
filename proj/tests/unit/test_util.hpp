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
#include "adaptpoint/rng.hpp"

#include <unistd.h>

#include <filesystem>
#include <string>

namespace adaptpoint::test {

/// Points uniform in [-1, 1]^3.
inline Matrix random_points(Eigen::Index n, std::uint64_t seed, std::uint64_t stream = 0) {
  RngStream rng(seed, stream);
  Matrix m(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
  }
  return m;
}

/// Points on the unit sphere surface.
inline Matrix sphere_points(Eigen::Index n, std::uint64_t seed, std::uint64_t stream = 0) {
  RngStream rng(seed, stream);
  Matrix m(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vec3 v(rng.normal(), rng.normal(), rng.normal());
    m.row(i) = v.normalized().transpose();
  }
  return m;
}

/// A fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("adaptpoint-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace adaptpoint::test
