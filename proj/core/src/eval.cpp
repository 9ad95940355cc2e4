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

#include "adaptpoint/eval.hpp"

#include "adaptpoint/data_io.hpp"
#include "adaptpoint/errors.hpp"
#include "adaptpoint/parallel.hpp"
#include "le_io.hpp"

#include <cstdio>
#include <optional>
#include <sstream>
#include <unordered_map>

namespace adaptpoint {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kResample = 0xe7a1;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

double overall_accuracy(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.empty()) throw std::invalid_argument("overall_accuracy: no predictions");
  if (predictions.size() != labels.size()) {
    throw std::invalid_argument("overall_accuracy: " + std::to_string(predictions.size()) + " predictions for " +
                                std::to_string(labels.size()) + " labels");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) correct += predictions[i] == labels[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

double MetricsTable::family_sum(Family f) const {
  double s = 0.0;
  for (double e : error[family_index(f)]) s += e;
  return s;
}

void MetricsTable::validate() const {
  for (Family f : kAllFamilies) {
    for (int l = 1; l <= kNumSeverities; ++l) {
      const double e = at(f, l);
      if (!(e >= 0.0 && e <= 1.0)) {
        throw std::invalid_argument("error rate " + std::to_string(e) + " for " + std::string(family_name(f)) +
                                    " severity " + std::to_string(l) + " outside [0, 1]");
      }
    }
  }
  if (!(clean_oa >= 0.0 && clean_oa <= 1.0)) throw std::invalid_argument("clean OA outside [0, 1]");
}

UndefinedCe::UndefinedCe(Family f)
    : std::domain_error("CE undefined: baseline error for family '" + std::string(family_name(f)) + "' is zero"),
      family_(f) {}

CorruptionErrors corruption_error(const MetricsTable& method, const MetricsTable& baseline) {
  method.validate();
  baseline.validate();
  CorruptionErrors out;
  double total = 0.0;
  for (Family f : kAllFamilies) {
    const double base = baseline.family_sum(f);
    if (!(base > 0.0)) throw UndefinedCe(f);
    const double ce = 100.0 * (method.family_sum(f) / base);  // exactly 100 when the sums agree
    out.ce[family_index(f)] = ce;
    total += ce;
  }
  out.mce = total / static_cast<double>(kNumFamilies);
  return out;
}

SuiteEvaluation evaluate_suite(const Predictor& predict, const fs::path& suite_dir,
                               const std::vector<PointCloud>& test_set, const std::vector<std::string>& test_paths,
                               const EvalOptions& options) {
  if (test_set.empty()) throw std::invalid_argument("evaluate_suite: empty test set");
  if (test_paths.size() != test_set.size()) {
    throw IntegrityError("evaluate_suite: " + std::to_string(test_paths.size()) + " test paths for " +
                         std::to_string(test_set.size()) + " test clouds");
  }
  const SuiteManifest manifest = SuiteManifest::decode(detail::read_file(suite_dir / kSuiteManifestName));

  const std::size_t clean = test_set.size();
  std::vector<Prediction> preds(clean + manifest.records.size());
  parallel_for(preds.size(), options.threads, [&](std::size_t i) {
    Prediction& p = preds[i];
    if (i < clean) {
      const PointCloud& c = test_set[i];
      if (!c.label) throw IntegrityError("test cloud " + test_paths[i] + " has no label");
      if (c.size() != options.num_points) {
        throw IntegrityError("test cloud " + test_paths[i] + " has " + std::to_string(c.size()) + " points");
      }
      p = {test_paths[i], *c.label, predict(c.points)};
      return;
    }
    const SuiteRecord& rec = manifest.records[i - clean];
    if (rec.sample_index >= test_set.size()) {
      throw IntegrityError("suite record " + rec.path + " refers to sample " + std::to_string(rec.sample_index) +
                           " of a " + std::to_string(test_set.size()) + "-sample test set");
    }
    const fs::path file = suite_dir / rec.path;
    if (!fs::exists(file)) throw IntegrityError("suite file missing: " + file.string());
    const PointCloud cloud = read_cloud(file);
    if (cloud.size() != rec.point_count) {
      throw IntegrityError("suite file " + rec.path + " has " + std::to_string(cloud.size()) +
                           " points, manifest says " + std::to_string(rec.point_count));
    }
    RngStream rng(options.resample_seed, stream_id({kResample, i - clean}));
    const PointCloud fixed = resample_to_n(cloud, options.num_points, rng);
    p = {rec.path, *test_set[rec.sample_index].label, predict(fixed.points)};
  });

  SuiteEvaluation out;
  out.table = rescore(preds, manifest);
  out.predictions = std::move(preds);
  return out;
}

std::string encode_predictions(const std::vector<Prediction>& predictions) {
  std::string out;
  for (const Prediction& p : predictions) {
    out += p.file + ' ' + std::to_string(p.truth) + ' ' + std::to_string(p.predicted) + '\n';
  }
  return out;
}

std::vector<Prediction> decode_predictions(const std::string& text) {
  std::vector<Prediction> out;
  std::istringstream in(text);
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    if (!line.empty()) {
      std::istringstream rec(line);
      Prediction p;
      std::string extra;
      if (!(rec >> p.file >> p.truth >> p.predicted) || (rec >> extra)) {
        throw ParseError("malformed prediction line", offset);
      }
      out.push_back(std::move(p));
    }
    offset += line.size() + 1;
  }
  return out;
}

MetricsTable rescore(const std::vector<Prediction>& predictions, const SuiteManifest& manifest) {
  std::unordered_map<std::string, const SuiteRecord*> by_path;
  for (const SuiteRecord& r : manifest.records) by_path.emplace(r.path, &r);

  std::array<std::array<std::size_t, kNumSeverities>, kNumFamilies> wrong{};
  std::array<std::array<std::size_t, kNumSeverities>, kNumFamilies> total{};
  std::size_t clean_correct = 0;
  std::size_t clean_total = 0;
  for (const Prediction& p : predictions) {
    const auto it = by_path.find(p.file);
    if (it == by_path.end()) {
      ++clean_total;
      clean_correct += p.truth == p.predicted ? 1 : 0;
      continue;
    }
    const std::size_t f = family_index(it->second->family);
    const auto l = static_cast<std::size_t>(it->second->severity - 1);
    ++total[f][l];
    wrong[f][l] += p.truth == p.predicted ? 0 : 1;
  }
  MetricsTable t;
  for (std::size_t f = 0; f < kNumFamilies; ++f) {
    for (std::size_t l = 0; l < kNumSeverities; ++l) {
      if (total[f][l] > 0) t.error[f][l] = static_cast<double>(wrong[f][l]) / static_cast<double>(total[f][l]);
    }
  }
  if (clean_total > 0) t.clean_oa = static_cast<double>(clean_correct) / static_cast<double>(clean_total);
  return t;
}

std::string format_report(const MetricsTable& method, const MetricsTable* baseline, const std::string& baseline_name) {
  std::optional<CorruptionErrors> ce;
  if (baseline != nullptr) ce = corruption_error(method, *baseline);
  std::string out = "# baseline: " + (baseline != nullptr ? baseline_name : std::string("none")) + "\n";
  out += "family\tsev1\tsev2\tsev3\tsev4\tsev5\tmean\tCE\n";
  for (Family f : kAllFamilies) {
    out += std::string(family_label(f));
    for (int l = 1; l <= kNumSeverities; ++l) out += '\t' + fmt("%.4f", method.at(f, l));
    out += '\t' + fmt("%.4f", method.family_sum(f) / kNumSeverities);
    out += '\t' + (ce ? fmt("%.1f", ce->ce[family_index(f)]) : std::string("-"));
    out += '\n';
  }
  out += "clean_OA\t" + fmt("%.4f", method.clean_oa) + '\n';
  out += "mCE\t" + (ce ? fmt("%.1f", ce->mce) : std::string("-")) + '\n';
  return out;
}

std::string encode_table(const MetricsTable& table) {
  std::string out = "family\tsev1\tsev2\tsev3\tsev4\tsev5\n";
  for (Family f : kAllFamilies) {
    out += std::string(family_name(f));
    for (int l = 1; l <= kNumSeverities; ++l) out += '\t' + fmt("%.17g", table.at(f, l));
    out += '\n';
  }
  out += "clean_oa\t" + fmt("%.17g", table.clean_oa) + '\n';
  return out;
}

MetricsTable parse_table(const std::string& text) {
  MetricsTable t;
  std::istringstream in(text);
  std::string line;
  std::size_t offset = 0;
  std::array<bool, kNumFamilies> seen{};
  bool have_oa = false;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string key;
    row >> key;
    if (key.empty() || key == "family") {
      offset += line.size() + 1;
      continue;
    }
    if (key == "clean_oa") {
      if (!(row >> t.clean_oa)) throw ParseError("malformed clean_oa row", offset);
      have_oa = true;
    } else {
      Family f;
      try {
        f = parse_family(key);
      } catch (const std::invalid_argument&) {
        throw ParseError("unknown family '" + key + "'", offset);
      }
      for (int l = 1; l <= kNumSeverities; ++l) {
        if (!(row >> t.at(f, l))) throw ParseError("malformed row for " + key, offset);
      }
      seen[family_index(f)] = true;
    }
    offset += line.size() + 1;
  }
  for (Family f : kAllFamilies) {
    if (!seen[family_index(f)]) throw ParseError("missing row for " + std::string(family_name(f)), offset);
  }
  if (!have_oa) throw ParseError("missing clean_oa row", offset);
  t.validate();
  return t;
}

}  // namespace adaptpoint
