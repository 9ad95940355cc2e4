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

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace adaptpoint {

/// The seven test-time corruption families, in report column order.
enum class Family { kScale, kJitter, kDropGlobal, kDropLocal, kAddGlobal, kAddLocal, kRotate };

inline constexpr std::size_t kNumFamilies = 7;
inline constexpr int kNumSeverities = 5;

inline constexpr std::array<Family, kNumFamilies> kAllFamilies = {
    Family::kScale,   Family::kJitter,   Family::kDropGlobal, Family::kDropLocal,
    Family::kAddGlobal, Family::kAddLocal, Family::kRotate};

/// Machine name used in manifests and paths ("scale", "drop_global", ...).
std::string_view family_name(Family f);
/// Short column label used in reports ("Sca", "Drop-G", ...).
std::string_view family_label(Family f);
/// Accepts the machine name or the column label. Throws std::invalid_argument.
Family parse_family(std::string_view name);
inline std::size_t family_index(Family f) { return static_cast<std::size_t>(f); }

struct CorruptionSpec {
  Family family = Family::kJitter;
  int severity = 1;  // 1..5
};

/// Per-family parameters for severities 1..5 (index severity - 1).
struct SeverityTable {
  std::array<double, 5> scale_bound{1.2, 1.4, 1.6, 1.8, 2.0};           // factor in [1/s, s]
  std::array<double, 5> jitter_sigma{0.01, 0.02, 0.03, 0.04, 0.05};
  std::array<double, 5> rotate_deg{15, 30, 45, 60, 75};                  // angle bound per axis
  std::array<double, 5> drop_global_frac{0.25, 0.375, 0.5, 0.625, 0.75};
  std::array<double, 5> drop_local_frac{0.075, 0.15, 0.225, 0.3, 0.375};
  std::array<double, 5> drop_local_centers{2, 3, 4, 5, 6};
  std::array<double, 5> add_global_frac{0.1, 0.2, 0.3, 0.4, 0.5};
  std::array<double, 5> add_local_frac{0.1, 0.2, 0.3, 0.4, 0.5};
  std::array<double, 5> add_local_centers{2, 3, 4, 5, 6};
  double add_local_sigma = 0.075;
  double add_local_clip_radius = 1.1;

  /// Throws std::invalid_argument unless every row is strictly increasing
  /// (and scale bounds exceed 1).
  void validate() const;
};

/// Applies one corruption. Output size may differ from the input for the drop
/// and add families. Throws std::invalid_argument for severities outside 1..5.
PointCloud apply_corruption(const PointCloud& cloud, const CorruptionSpec& spec, RngStream& rng,
                            const SeverityTable& table = {});

/// Stream id for (sample index, family, severity) inside a suite.
std::uint64_t corruption_stream(std::size_t sample_index, Family family, int severity);

/// Symmetric Chamfer distance: the mean of the two directed mean
/// nearest-neighbor (Euclidean) distances.
double chamfer_distance(const PointCloud& a, const PointCloud& b);

struct SuiteRecord {
  std::string path;  // relative to the suite directory
  Family family = Family::kJitter;
  int severity = 1;
  std::size_t sample_index = 0;
  std::size_t point_count = 0;
};

/// Text manifest: header "ADAPTPOINT-SUITE v1 seed=<u64>", then one line per
/// file: "<relative-path> <family> <severity> <sample-index> <point-count>".
struct SuiteManifest {
  std::uint64_t seed = 0;
  std::vector<SuiteRecord> records;

  std::string encode() const;
  static SuiteManifest decode(const std::string& text);
};

inline constexpr std::string_view kSuiteManifestName = "suite.txt";

struct SuiteOptions {
  std::vector<Family> families{kAllFamilies.begin(), kAllFamilies.end()};
  std::vector<int> severities{1, 2, 3, 4, 5};
  SeverityTable table;
  unsigned threads = 1;
};

/// Writes every (sample, family, severity) corruption as pcb-binary under
/// out_dir/<family>/<severity>/ and the manifest out_dir/suite.txt. Output is
/// a pure function of (dataset, seed, options).
SuiteManifest build_suite(const std::vector<PointCloud>& dataset, const std::filesystem::path& out_dir,
                          std::uint64_t seed, const SuiteOptions& options = {});

}  // namespace adaptpoint
