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

#include "adaptpoint/corruptions.hpp"
#include "adaptpoint/geom.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace adaptpoint {

/// Fraction of positions where prediction equals label. Throws
/// std::invalid_argument for empty or unequal inputs.
double overall_accuracy(std::span<const int> predictions, std::span<const int> labels);

/// Error rates per (family, severity) and clean overall accuracy.
struct MetricsTable {
  std::array<std::array<double, kNumSeverities>, kNumFamilies> error{};
  double clean_oa = 0.0;

  double& at(Family f, int severity) { return error[family_index(f)][static_cast<std::size_t>(severity - 1)]; }
  double at(Family f, int severity) const { return error[family_index(f)][static_cast<std::size_t>(severity - 1)]; }
  double family_sum(Family f) const;
  /// Throws std::invalid_argument when a rate leaves [0, 1].
  void validate() const;
};

struct CorruptionErrors {
  std::array<double, kNumFamilies> ce{};  // percent
  double mce = 0.0;                       // percent
};

/// A family whose baseline errors sum to zero, so its CE is undefined.
class UndefinedCe : public std::domain_error {
 public:
  explicit UndefinedCe(Family f);
  Family family() const { return family_; }

 private:
  Family family_;
};

/// CE_c = 100 * sum_l E_method(c, l) / sum_l E_baseline(c, l); mCE is the
/// mean over the seven families.
CorruptionErrors corruption_error(const MetricsTable& method, const MetricsTable& baseline);

struct Prediction {
  std::string file;
  int truth = 0;
  int predicted = 0;
};

struct SuiteEvaluation {
  MetricsTable table;
  std::vector<Prediction> predictions;  // clean test files first, then suite files in manifest order
};

using Predictor = std::function<int(const Matrix& points)>;

struct EvalOptions {
  std::size_t num_points = 256;
  std::uint64_t resample_seed = 0;
  unsigned threads = 1;
};

/// Classifies the clean test set and every suite file. Corrupted clouds are
/// resampled to `num_points` (FPS when long, random duplicates when short)
/// with a stream derived from the resampling seed and the file's position.
/// Throws IntegrityError when the manifest and the files or test set
/// disagree. `predict` must be safe to call concurrently when threads > 1.
SuiteEvaluation evaluate_suite(const Predictor& predict, const std::filesystem::path& suite_dir,
                               const std::vector<PointCloud>& test_set, const std::vector<std::string>& test_paths,
                               const EvalOptions& options = {});

/// `<file> <true> <pred>` lines.
std::string encode_predictions(const std::vector<Prediction>& predictions);
std::vector<Prediction> decode_predictions(const std::string& text);

/// Rebuilds the table from a prediction dump. Files listed in the manifest
/// count toward their (family, severity) cell; all others count as clean.
MetricsTable rescore(const std::vector<Prediction>& predictions, const SuiteManifest& manifest);

/// Tab-separated report: one row per family with severity columns, its mean
/// error and CE, followed by clean OA and mCE. `baseline_name` goes in the
/// header comment.
std::string format_report(const MetricsTable& method, const MetricsTable* baseline, const std::string& baseline_name);

/// Plain TSV of the error table (family rows, severity columns) and clean OA,
/// parsed back by `parse_table`.
std::string encode_table(const MetricsTable& table);
MetricsTable parse_table(const std::string& text);

}  // namespace adaptpoint
