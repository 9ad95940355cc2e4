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
#include "adaptpoint/parallel.hpp"
#include "le_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace adaptpoint {

namespace fs = std::filesystem;

std::string_view family_name(Family f) {
  switch (f) {
    case Family::kScale: return "scale";
    case Family::kJitter: return "jitter";
    case Family::kDropGlobal: return "drop_global";
    case Family::kDropLocal: return "drop_local";
    case Family::kAddGlobal: return "add_global";
    case Family::kAddLocal: return "add_local";
    case Family::kRotate: return "rotate";
  }
  return "unknown";
}

std::string_view family_label(Family f) {
  switch (f) {
    case Family::kScale: return "Sca";
    case Family::kJitter: return "Jit";
    case Family::kDropGlobal: return "Drop-G";
    case Family::kDropLocal: return "Drop-L";
    case Family::kAddGlobal: return "Add-G";
    case Family::kAddLocal: return "Add-L";
    case Family::kRotate: return "Rot";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  for (Family f : kAllFamilies) {
    if (family_name(f) == name || family_label(f) == name) return f;
  }
  throw std::invalid_argument("unknown corruption family: " + std::string(name));
}

void SeverityTable::validate() const {
  auto increasing = [](const std::array<double, 5>& row, const char* what) {
    for (std::size_t i = 1; i < row.size(); ++i) {
      if (!(row[i] > row[i - 1])) {
        throw std::invalid_argument(std::string("severity table row '") + what +
                                    "' is not strictly increasing");
      }
    }
  };
  increasing(scale_bound, "scale_bound");
  increasing(jitter_sigma, "jitter_sigma");
  increasing(rotate_deg, "rotate_deg");
  increasing(drop_global_frac, "drop_global_frac");
  increasing(drop_local_frac, "drop_local_frac");
  increasing(drop_local_centers, "drop_local_centers");
  increasing(add_global_frac, "add_global_frac");
  increasing(add_local_frac, "add_local_frac");
  increasing(add_local_centers, "add_local_centers");
  if (!(scale_bound[0] > 1.0)) throw std::invalid_argument("scale bounds must exceed 1");
  if (!(drop_global_frac[4] < 1.0)) throw std::invalid_argument("drop_global_frac must stay below 1");
  if (!(add_local_sigma > 0.0 && add_local_clip_radius > 0.0)) {
    throw std::invalid_argument("add_local sigma and clip radius must be positive");
  }
}

namespace {

std::size_t count_of(std::size_t n, double fraction) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction + 1e-9));
}

/// Splits `total` into `parts` random non-negative sizes summing to total.
std::vector<std::size_t> random_split(std::size_t total, std::size_t parts, RngStream& rng) {
  std::vector<double> w(parts);
  double sum = 0.0;
  for (double& x : w) {
    x = rng.uniform_open();
    sum += x;
  }
  std::vector<std::size_t> sizes(parts);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < parts; ++i) {
    sizes[i] = static_cast<std::size_t>(std::floor(static_cast<double>(total) * w[i] / sum));
    assigned += sizes[i];
  }
  for (std::size_t i = 0; assigned < total; i = (i + 1) % parts, ++assigned) ++sizes[i];
  return sizes;
}

Matrix keep_rows(const Matrix& pts, const std::vector<bool>& keep) {
  const auto kept = static_cast<Eigen::Index>(std::count(keep.begin(), keep.end(), true));
  Matrix out(kept, 3);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    if (keep[static_cast<std::size_t>(i)]) out.row(r++) = pts.row(i);
  }
  return out;
}

Matrix append_rows(const Matrix& pts, const Matrix& extra) {
  Matrix out(pts.rows() + extra.rows(), 3);
  out.topRows(pts.rows()) = pts;
  out.bottomRows(extra.rows()) = extra;
  return out;
}

Vec3 uniform_in_ball(RngStream& rng) {
  Vec3 d;
  do {
    d = {rng.normal(), rng.normal(), rng.normal()};
  } while (d.norm() < 1e-12);
  return d.normalized() * std::cbrt(rng.uniform());
}

}  // namespace

std::uint64_t corruption_stream(std::size_t sample_index, Family family, int severity) {
  return stream_id({0xc0aaULL, sample_index, family_index(family), static_cast<std::uint64_t>(severity)});
}

PointCloud apply_corruption(const PointCloud& cloud, const CorruptionSpec& spec, RngStream& rng,
                            const SeverityTable& table) {
  if (spec.severity < 1 || spec.severity > kNumSeverities) {
    throw std::invalid_argument("severity must lie in 1..5, got " + std::to_string(spec.severity));
  }
  cloud.validate();
  if (cloud.size() < 64) throw std::invalid_argument("apply_corruption: needs at least 64 points");
  const auto level = static_cast<std::size_t>(spec.severity - 1);
  const std::size_t n = cloud.size();
  const Matrix& pts = cloud.points;
  Matrix out;

  switch (spec.family) {
    case Family::kScale: {
      const double log_s = std::log(table.scale_bound[level]);
      const Eigen::RowVector3d f(std::exp(rng.uniform(-log_s, log_s)), std::exp(rng.uniform(-log_s, log_s)),
                                 std::exp(rng.uniform(-log_s, log_s)));
      out = pts.array().rowwise() * f.array();
      break;
    }
    case Family::kJitter: {
      const double sigma = table.jitter_sigma[level];
      out = pts;
      for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] += sigma * rng.normal();
      break;
    }
    case Family::kRotate: {
      const double bound = table.rotate_deg[level] * std::numbers::pi / 180.0;
      const EulerAngles a{rng.uniform(-bound, bound), rng.uniform(-bound, bound), rng.uniform(-bound, bound)};
      out = pts * euler_to_rotation(a).transpose();
      break;
    }
    case Family::kDropGlobal: {
      const std::size_t drop = std::min(count_of(n, table.drop_global_frac[level]), n - 1);
      const auto perm = rng.permutation(n);
      std::vector<bool> keep(n, true);
      for (std::size_t i = 0; i < drop; ++i) keep[perm[i]] = false;
      out = keep_rows(pts, keep);
      break;
    }
    case Family::kDropLocal: {
      const std::size_t total = std::min(count_of(n, table.drop_local_frac[level]), n - 1);
      const auto centers = static_cast<std::size_t>(table.drop_local_centers[level]);
      const auto perm = rng.permutation(n);
      const auto sizes = random_split(total, centers, rng);
      std::vector<bool> keep(n, true);
      std::vector<std::pair<double, std::size_t>> dist;
      for (std::size_t c = 0; c < centers; ++c) {
        const Eigen::RowVector3d center = pts.row(static_cast<Eigen::Index>(perm[c]));
        dist.clear();
        for (std::size_t i = 0; i < n; ++i) {
          if (keep[i]) dist.emplace_back((pts.row(static_cast<Eigen::Index>(i)) - center).squaredNorm(), i);
        }
        const std::size_t take = std::min(sizes[c], dist.size());
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(take), dist.end());
        for (std::size_t j = 0; j < take; ++j) keep[dist[j].second] = false;
      }
      out = keep_rows(pts, keep);
      break;
    }
    case Family::kAddGlobal: {
      Matrix extra(static_cast<Eigen::Index>(count_of(n, table.add_global_frac[level])), 3);
      for (Eigen::Index i = 0; i < extra.rows(); ++i) extra.row(i) = uniform_in_ball(rng).transpose();
      out = append_rows(pts, extra);
      break;
    }
    case Family::kAddLocal: {
      const std::size_t total = count_of(n, table.add_local_frac[level]);
      const auto centers = static_cast<std::size_t>(table.add_local_centers[level]);
      const auto perm = rng.permutation(n);
      const auto sizes = random_split(total, centers, rng);
      Matrix extra(static_cast<Eigen::Index>(total), 3);
      Eigen::Index r = 0;
      for (std::size_t c = 0; c < centers; ++c) {
        const Vec3 center = cloud.point(perm[c]);
        for (std::size_t j = 0; j < sizes[c]; ++j) {
          Vec3 p = center + table.add_local_sigma * Vec3(rng.normal(), rng.normal(), rng.normal());
          if (p.norm() > table.add_local_clip_radius) p *= table.add_local_clip_radius / p.norm();
          extra.row(r++) = p.transpose();
        }
      }
      out = append_rows(pts, extra);
      break;
    }
  }
  return PointCloud(std::move(out), cloud.label);
}

double chamfer_distance(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("chamfer_distance: empty cloud");
  auto directed = [](const Matrix& from, const Matrix& to) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < from.rows(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < to.rows(); ++j) best = std::min(best, (from.row(i) - to.row(j)).squaredNorm());
      total += std::sqrt(best);
    }
    return total / static_cast<double>(from.rows());
  };
  return 0.5 * (directed(a.points, b.points) + directed(b.points, a.points));
}

std::string SuiteManifest::encode() const {
  std::ostringstream out;
  out << "ADAPTPOINT-SUITE v1 seed=" << seed << '\n';
  for (const auto& r : records) {
    out << r.path << ' ' << family_name(r.family) << ' ' << r.severity << ' ' << r.sample_index << ' '
        << r.point_count << '\n';
  }
  return out.str();
}

SuiteManifest SuiteManifest::decode(const std::string& text) {
  SuiteManifest m;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty suite manifest", 0);
  {
    std::istringstream h(line);
    std::string magic, version, seed_kv;
    h >> magic >> version >> seed_kv;
    if (magic != "ADAPTPOINT-SUITE" || version != "v1" || !seed_kv.starts_with("seed=")) {
      throw ParseError("bad suite manifest header", 0);
    }
    try {
      m.seed = std::stoull(seed_kv.substr(5));
    } catch (const std::exception&) {
      throw ParseError("malformed suite seed", 0);
    }
  }
  std::size_t offset = line.size() + 1;
  while (std::getline(in, line)) {
    if (!line.empty()) {
      std::istringstream rec(line);
      SuiteRecord r;
      std::string family;
      if (!(rec >> r.path >> family >> r.severity >> r.sample_index >> r.point_count)) {
        throw ParseError("malformed suite record", offset);
      }
      try {
        r.family = parse_family(family);
      } catch (const std::invalid_argument&) {
        throw ParseError("unknown family '" + family + "'", offset);
      }
      if (r.severity < 1 || r.severity > kNumSeverities) throw ParseError("severity out of range", offset);
      m.records.push_back(std::move(r));
    }
    offset += line.size() + 1;
  }
  return m;
}

SuiteManifest build_suite(const std::vector<PointCloud>& dataset, const fs::path& out_dir,
                          std::uint64_t seed, const SuiteOptions& options) {
  if (dataset.empty()) throw std::invalid_argument("build_suite: empty dataset");
  for (int s : options.severities) {
    if (s < 1 || s > kNumSeverities) throw std::invalid_argument("build_suite: severity out of range");
  }
  SuiteManifest manifest;
  manifest.seed = seed;
  for (Family f : options.families) {
    for (int s : options.severities) {
      std::error_code ec;
      const fs::path dir = out_dir / std::string(family_name(f)) / std::to_string(s);
      fs::create_directories(dir, ec);
      if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
      for (std::size_t i = 0; i < dataset.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "%05zu.pcb", i);
        manifest.records.push_back(
            {std::string(family_name(f)) + "/" + std::to_string(s) + "/" + name, f, s, i, 0});
      }
    }
  }
  parallel_for(manifest.records.size(), options.threads, [&](std::size_t k) {
    SuiteRecord& rec = manifest.records[k];
    RngStream rng(seed, corruption_stream(rec.sample_index, rec.family, rec.severity));
    const PointCloud out =
        apply_corruption(dataset[rec.sample_index], {rec.family, rec.severity}, rng, options.table);
    write_cloud(out_dir / rec.path, out, CloudFormat::kPcbBinary);
    rec.point_count = out.size();
  });
  detail::write_file((out_dir / kSuiteManifestName).string(), manifest.encode());
  return manifest;
}

}  // namespace adaptpoint
