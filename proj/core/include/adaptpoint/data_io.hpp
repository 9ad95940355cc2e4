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

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace adaptpoint {

// ---------------------------------------------------------------------------
// Point cloud files

enum class CloudFormat {
  kXyzText,    // one "x y z" line per point, 9 significant digits
  kPcbBinary,  // "PCB1", u32 LE count, count x 3 f32 LE
};

/// Picks the format from the extension: ".xyz"/".txt" are text, anything
/// else binary.
CloudFormat format_for_path(const std::filesystem::path& path);

std::string encode_cloud(const PointCloud& cloud, CloudFormat format);
/// Throws ParseError (with byte offset) on bad magic, truncation, trailing
/// bytes, malformed numbers, non-finite values or an empty cloud.
PointCloud decode_cloud(const std::string& bytes, CloudFormat format);

void write_cloud(const std::filesystem::path& path, const PointCloud& cloud, CloudFormat format);
void write_cloud(const std::filesystem::path& path, const PointCloud& cloud);
PointCloud read_cloud(const std::filesystem::path& path, CloudFormat format);
PointCloud read_cloud(const std::filesystem::path& path);

/// Exactly n points: FPS subsampling when the cloud is larger, the original
/// points followed by uniformly drawn duplicates when it is smaller, and the
/// cloud itself when the sizes match.
PointCloud resample_to_n(const PointCloud& cloud, std::size_t n, RngStream& rng);

// ---------------------------------------------------------------------------
// Synthetic dataset

enum class ShapeClass { kSphere, kCube, kCylinder, kCone, kTorus, kPlane };

std::string_view shape_name(ShapeClass s);
ShapeClass parse_shape(std::string_view name);
std::vector<ShapeClass> all_shapes();

/// Torus radii and cone geometry used by the generator.
inline constexpr double kTorusMajor = 1.0;
inline constexpr double kTorusMinor = 0.35;
inline constexpr double kConeHalfAngleDeg = 30.0;
inline constexpr double kConeHeight = 2.0;

/// Uniform surface samples of the canonical shape (before any pose).
Matrix sample_shape_surface(ShapeClass shape, std::size_t n, RngStream& rng);

struct SyntheticConfig {
  std::vector<ShapeClass> classes = all_shapes();
  std::size_t samples_per_class = 100;
  std::size_t num_points = 256;
  double max_rotation_deg = 180.0;
  double min_scale = 0.8;
  double max_scale = 1.2;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument when fewer than 2 classes or N < 64.
  void validate() const;
};

/// One generated sample, before it is written.
PointCloud synthesize_sample(const SyntheticConfig& cfg, std::size_t class_index,
                             std::size_t sample_index);

enum class Split { kTrain, kTest };

struct DatasetRecord {
  std::string path;  // relative to the manifest directory
  int class_id = 0;
  Split split = Split::kTrain;
};

/// Text manifest:
///   ADAPTPOINT-DATA v1 seed=<u64> n=<N> classes=<name,name,...>
///   <relative-path> <class-id> <train|test>
struct DatasetManifest {
  std::uint64_t seed = 0;
  std::size_t num_points = 0;
  std::vector<std::string> class_names;
  std::vector<DatasetRecord> records;

  std::string encode() const;
  static DatasetManifest decode(const std::string& text);
  /// Checks class ids and that every path exists under `root`.
  void check(const std::filesystem::path& root) const;
};

inline constexpr std::string_view kDatasetManifestName = "dataset.txt";

/// Writes every sample as pcb-binary under `out_dir/clouds/` plus the manifest
/// `out_dir/dataset.txt`. Per class, a seeded shuffle assigns the first
/// train_fraction of samples to the train split.
DatasetManifest generate_synthetic(const SyntheticConfig& cfg, const std::filesystem::path& out_dir,
                                   unsigned threads = 1);

/// In-memory split used by training and evaluation.
struct Dataset {
  std::vector<PointCloud> train;
  std::vector<PointCloud> test;
  std::vector<std::string> train_paths;
  std::vector<std::string> test_paths;
  std::vector<std::string> class_names;
};

/// Same samples and split as generate_synthetic, without touching disk.
Dataset synthesize_dataset(const SyntheticConfig& cfg);

/// Loads a manifest and its clouds, labelled by class id.
Dataset load_dataset(const std::filesystem::path& manifest_path);

}  // namespace adaptpoint
