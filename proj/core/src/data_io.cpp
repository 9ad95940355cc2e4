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

#include "adaptpoint/data_io.hpp"

#include "adaptpoint/errors.hpp"
#include "adaptpoint/parallel.hpp"
#include "le_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace adaptpoint {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Cloud files

namespace {

constexpr char kPcbMagic[] = "PCB1";

std::string encode_text(const PointCloud& cloud) {
  std::string out;
  out.reserve(cloud.size() * 48);
  char line[128];
  for (Eigen::Index i = 0; i < cloud.points.rows(); ++i) {
    const int len = std::snprintf(line, sizeof(line), "%.9g %.9g %.9g\n", cloud.points(i, 0),
                                  cloud.points(i, 1), cloud.points(i, 2));
    out.append(line, static_cast<std::size_t>(len));
  }
  return out;
}

PointCloud decode_text(const std::string& bytes) {
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    std::size_t eol = bytes.find('\n', pos);
    if (eol == std::string::npos) eol = bytes.size();
    std::size_t cursor = pos;
    int fields = 0;
    double xyz[3];
    while (true) {
      while (cursor < eol && (bytes[cursor] == ' ' || bytes[cursor] == '\t' || bytes[cursor] == '\r')) {
        ++cursor;
      }
      if (cursor >= eol) break;
      if (fields == 3) throw ParseError("more than 3 values on a line", cursor);
      double v = 0.0;
      const auto res = std::from_chars(bytes.data() + cursor, bytes.data() + eol, v);
      if (res.ec != std::errc()) throw ParseError("malformed number", cursor);
      if (!std::isfinite(v)) throw ParseError("non-finite coordinate", cursor);
      xyz[fields++] = v;
      cursor = static_cast<std::size_t>(res.ptr - bytes.data());
    }
    if (fields != 0 && fields != 3) throw ParseError("expected 3 values on a line", pos);
    if (fields == 3) values.insert(values.end(), xyz, xyz + 3);
    pos = eol + 1;
  }
  if (values.empty()) throw ParseError("empty point cloud", 0);
  Matrix pts(static_cast<Eigen::Index>(values.size() / 3), 3);
  std::copy(values.begin(), values.end(), pts.data());
  return PointCloud(std::move(pts));
}

std::string encode_binary(const PointCloud& cloud) {
  std::string out(kPcbMagic);
  detail::put_u32(out, static_cast<std::uint32_t>(cloud.size()));
  for (Eigen::Index i = 0; i < cloud.points.size(); ++i) {
    detail::put_f32(out, static_cast<float>(cloud.points.data()[i]));
  }
  return out;
}

PointCloud decode_binary(const std::string& bytes) {
  detail::ByteReader in(bytes);
  if (bytes.size() < 4 || bytes.compare(0, 4, kPcbMagic) != 0) throw ParseError("bad magic", 0);
  in.bytes(4, "magic");
  const std::uint32_t count = in.u32("point count");
  if (count == 0) throw ParseError("empty point cloud", 4);
  const std::uint64_t need = static_cast<std::uint64_t>(count) * 12;
  if (need > in.remaining()) throw ParseError("truncated point data", bytes.size());
  Matrix pts(count, 3);
  for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(count) * 3; ++i) {
    const std::size_t at = in.offset();
    const float f = in.f32("point data");
    if (!std::isfinite(f)) throw ParseError("non-finite coordinate", at);
    pts.data()[i] = static_cast<double>(f);
  }
  if (!in.at_end()) throw ParseError("trailing bytes after point data", in.offset());
  return PointCloud(std::move(pts));
}

}  // namespace

CloudFormat format_for_path(const fs::path& path) {
  const std::string ext = path.extension().string();
  return (ext == ".xyz" || ext == ".txt") ? CloudFormat::kXyzText : CloudFormat::kPcbBinary;
}

std::string encode_cloud(const PointCloud& cloud, CloudFormat format) {
  cloud.validate();
  return format == CloudFormat::kXyzText ? encode_text(cloud) : encode_binary(cloud);
}

PointCloud decode_cloud(const std::string& bytes, CloudFormat format) {
  return format == CloudFormat::kXyzText ? decode_text(bytes) : decode_binary(bytes);
}

void write_cloud(const fs::path& path, const PointCloud& cloud, CloudFormat format) {
  detail::write_file(path.string(), encode_cloud(cloud, format));
}

void write_cloud(const fs::path& path, const PointCloud& cloud) {
  write_cloud(path, cloud, format_for_path(path));
}

PointCloud read_cloud(const fs::path& path, CloudFormat format) {
  return decode_cloud(detail::read_file(path.string()), format);
}

PointCloud read_cloud(const fs::path& path) { return read_cloud(path, format_for_path(path)); }

PointCloud resample_to_n(const PointCloud& cloud, std::size_t n, RngStream& rng) {
  if (cloud.empty()) throw std::invalid_argument("resample_to_n: empty cloud");
  if (n == 0) throw std::invalid_argument("resample_to_n: n must be positive");
  const std::size_t m = cloud.size();
  if (m == n) return cloud;
  if (m > n) {
    const auto idx = fps(cloud.points, n, 0);
    return PointCloud(take_rows(cloud.points, idx), cloud.label);
  }
  Matrix out(static_cast<Eigen::Index>(n), 3);
  out.topRows(static_cast<Eigen::Index>(m)) = cloud.points;
  for (std::size_t i = m; i < n; ++i) {
    out.row(static_cast<Eigen::Index>(i)) = cloud.points.row(static_cast<Eigen::Index>(rng.index(m)));
  }
  return PointCloud(std::move(out), cloud.label);
}

// ---------------------------------------------------------------------------
// Synthetic shapes

namespace {

constexpr ShapeClass kShapes[] = {ShapeClass::kSphere,   ShapeClass::kCube,  ShapeClass::kCylinder,
                                  ShapeClass::kCone,     ShapeClass::kTorus, ShapeClass::kPlane};

Vec3 disk_point(double radius, double z, RngStream& rng) {
  const double r = radius * std::sqrt(rng.uniform());
  const double t = 2.0 * std::numbers::pi * rng.uniform();
  return {r * std::cos(t), r * std::sin(t), z};
}

}  // namespace

std::string_view shape_name(ShapeClass s) {
  switch (s) {
    case ShapeClass::kSphere: return "sphere";
    case ShapeClass::kCube: return "cube";
    case ShapeClass::kCylinder: return "cylinder";
    case ShapeClass::kCone: return "cone";
    case ShapeClass::kTorus: return "torus";
    case ShapeClass::kPlane: return "plane";
  }
  return "unknown";
}

ShapeClass parse_shape(std::string_view name) {
  for (ShapeClass s : kShapes) {
    if (shape_name(s) == name) return s;
  }
  throw std::invalid_argument("unknown shape class: " + std::string(name));
}

std::vector<ShapeClass> all_shapes() { return {std::begin(kShapes), std::end(kShapes)}; }

Matrix sample_shape_surface(ShapeClass shape, std::size_t n, RngStream& rng) {
  Matrix pts(static_cast<Eigen::Index>(n), 3);
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 p;
    switch (shape) {
      case ShapeClass::kSphere: {
        Vec3 v;
        do {
          v = {rng.normal(), rng.normal(), rng.normal()};
        } while (v.norm() < 1e-12);
        p = v.normalized();
        break;
      }
      case ShapeClass::kCube: {
        const auto face = rng.index(6);
        const double u = rng.uniform(-1.0, 1.0), v = rng.uniform(-1.0, 1.0);
        const double s = (face % 2 == 0) ? 1.0 : -1.0;
        if (face < 2) p = {s, u, v};
        else if (face < 4) p = {u, s, v};
        else p = {u, v, s};
        break;
      }
      case ShapeClass::kCylinder: {
        // radius 1, height 2: lateral area 4*pi, caps 2*pi in total
        if (rng.uniform() < 2.0 / 3.0) {
          const double t = two_pi * rng.uniform();
          p = {std::cos(t), std::sin(t), rng.uniform(-1.0, 1.0)};
        } else {
          p = disk_point(1.0, rng.uniform() < 0.5 ? 1.0 : -1.0, rng);
        }
        break;
      }
      case ShapeClass::kCone: {
        // apex at z = +h/2, base at z = -h/2
        const double radius = kConeHeight * std::tan(kConeHalfAngleDeg * std::numbers::pi / 180.0);
        const double slant = std::hypot(radius, kConeHeight);
        const double lateral = std::numbers::pi * radius * slant;
        const double base = std::numbers::pi * radius * radius;
        if (rng.uniform() < lateral / (lateral + base)) {
          const double s = std::sqrt(rng.uniform());
          const double t = two_pi * rng.uniform();
          p = {radius * s * std::cos(t), radius * s * std::sin(t), kConeHeight / 2.0 - kConeHeight * s};
        } else {
          p = disk_point(radius, -kConeHeight / 2.0, rng);
        }
        break;
      }
      case ShapeClass::kTorus: {
        double u = 0.0, v = 0.0;
        do {
          u = two_pi * rng.uniform();
          v = two_pi * rng.uniform();
        } while (rng.uniform() * (kTorusMajor + kTorusMinor) > kTorusMajor + kTorusMinor * std::cos(v));
        const double ring = kTorusMajor + kTorusMinor * std::cos(v);
        p = {ring * std::cos(u), ring * std::sin(u), kTorusMinor * std::sin(v)};
        break;
      }
      case ShapeClass::kPlane:
        p = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), 0.0};
        break;
    }
    pts.row(static_cast<Eigen::Index>(i)) = p.transpose();
  }
  return pts;
}

void SyntheticConfig::validate() const {
  if (classes.size() < 2) throw std::invalid_argument("synthetic data needs at least 2 classes");
  if (num_points < 64) throw std::invalid_argument("synthetic data needs at least 64 points");
  if (samples_per_class == 0) throw std::invalid_argument("samples_per_class must be positive");
  if (!(min_scale > 0.0 && min_scale <= max_scale)) throw std::invalid_argument("bad scale range");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must lie in (0, 1)");
  }
}

PointCloud synthesize_sample(const SyntheticConfig& cfg, std::size_t class_index,
                             std::size_t sample_index) {
  RngStream rng(cfg.seed, stream_id({0x5a3bULL, class_index, sample_index}));
  Matrix pts = sample_shape_surface(cfg.classes.at(class_index), cfg.num_points, rng);
  const double max_rot = cfg.max_rotation_deg * std::numbers::pi / 180.0;
  const Vec3 scale(rng.uniform(cfg.min_scale, cfg.max_scale), rng.uniform(cfg.min_scale, cfg.max_scale),
                   rng.uniform(cfg.min_scale, cfg.max_scale));
  const EulerAngles pose{rng.uniform(-max_rot, max_rot), rng.uniform(-max_rot, max_rot),
                         rng.uniform(-max_rot, max_rot)};
  const Mat3 r = euler_to_rotation(pose);
  pts = (pts.array().rowwise() * scale.transpose().array()).matrix() * r.transpose();
  return normalize_unit_sphere(PointCloud(std::move(pts), static_cast<int>(class_index)));
}

namespace {

std::vector<bool> train_mask(const SyntheticConfig& cfg, std::size_t class_index) {
  RngStream rng(cfg.seed, stream_id({0x5b17ULL, class_index}));
  const auto perm = rng.permutation(cfg.samples_per_class);
  const auto n_train = static_cast<std::size_t>(
      std::llround(cfg.train_fraction * static_cast<double>(cfg.samples_per_class)));
  std::vector<bool> is_train(cfg.samples_per_class, false);
  for (std::size_t i = 0; i < n_train; ++i) is_train[perm[i]] = true;
  return is_train;
}

std::string sample_path(const SyntheticConfig& cfg, std::size_t c, std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "_%04zu.pcb", i);
  return "clouds/" + std::string(shape_name(cfg.classes[c])) + buf;
}

}  // namespace

std::string DatasetManifest::encode() const {
  std::ostringstream out;
  out << "ADAPTPOINT-DATA v1 seed=" << seed << " n=" << num_points << " classes=";
  for (std::size_t i = 0; i < class_names.size(); ++i) out << (i ? "," : "") << class_names[i];
  out << '\n';
  for (const auto& r : records) {
    out << r.path << ' ' << r.class_id << ' ' << (r.split == Split::kTrain ? "train" : "test") << '\n';
  }
  return out.str();
}

DatasetManifest DatasetManifest::decode(const std::string& text) {
  DatasetManifest m;
  std::istringstream in(text);
  std::string line;
  std::size_t offset = 0;
  if (!std::getline(in, line)) throw ParseError("empty dataset manifest", 0);
  {
    std::istringstream h(line);
    std::string magic, version, seed_kv, n_kv, classes_kv;
    h >> magic >> version >> seed_kv >> n_kv >> classes_kv;
    if (magic != "ADAPTPOINT-DATA" || version != "v1") throw ParseError("bad dataset manifest header", 0);
    try {
      if (!seed_kv.starts_with("seed=") || !n_kv.starts_with("n=") || !classes_kv.starts_with("classes=")) {
        throw std::invalid_argument("header fields");
      }
      m.seed = std::stoull(seed_kv.substr(5));
      m.num_points = std::stoull(n_kv.substr(2));
    } catch (const std::exception&) {
      throw ParseError("malformed dataset manifest header", 0);
    }
    std::string names = classes_kv.substr(8);
    std::size_t start = 0;
    while (start <= names.size()) {
      const std::size_t comma = names.find(',', start);
      const std::string name = names.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (!name.empty()) m.class_names.push_back(name);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  offset += line.size() + 1;
  while (std::getline(in, line)) {
    if (!line.empty()) {
      std::istringstream rec(line);
      DatasetRecord r;
      std::string split;
      if (!(rec >> r.path >> r.class_id >> split) || (split != "train" && split != "test")) {
        throw ParseError("malformed dataset record", offset);
      }
      r.split = split == "train" ? Split::kTrain : Split::kTest;
      m.records.push_back(std::move(r));
    }
    offset += line.size() + 1;
  }
  return m;
}

void DatasetManifest::check(const fs::path& root) const {
  for (const auto& r : records) {
    if (r.class_id < 0 || static_cast<std::size_t>(r.class_id) >= class_names.size()) {
      throw IntegrityError("class id out of range in record " + r.path);
    }
    if (!fs::exists(root / r.path)) throw IntegrityError("missing dataset file " + r.path);
  }
}

DatasetManifest generate_synthetic(const SyntheticConfig& cfg, const fs::path& out_dir, unsigned threads) {
  cfg.validate();
  std::error_code ec;
  fs::create_directories(out_dir / "clouds", ec);
  if (ec) throw IoError("cannot create " + (out_dir / "clouds").string() + ": " + ec.message());

  DatasetManifest manifest;
  manifest.seed = cfg.seed;
  manifest.num_points = cfg.num_points;
  for (ShapeClass s : cfg.classes) manifest.class_names.emplace_back(shape_name(s));
  for (std::size_t c = 0; c < cfg.classes.size(); ++c) {
    const auto is_train = train_mask(cfg, c);
    for (std::size_t i = 0; i < cfg.samples_per_class; ++i) {
      manifest.records.push_back(
          {sample_path(cfg, c, i), static_cast<int>(c), is_train[i] ? Split::kTrain : Split::kTest});
    }
  }
  parallel_for(manifest.records.size(), threads, [&](std::size_t k) {
    const std::size_t c = k / cfg.samples_per_class;
    const std::size_t i = k % cfg.samples_per_class;
    write_cloud(out_dir / manifest.records[k].path, synthesize_sample(cfg, c, i), CloudFormat::kPcbBinary);
  });
  detail::write_file((out_dir / kDatasetManifestName).string(), manifest.encode());
  return manifest;
}

Dataset synthesize_dataset(const SyntheticConfig& cfg) {
  cfg.validate();
  Dataset ds;
  for (ShapeClass s : cfg.classes) ds.class_names.emplace_back(shape_name(s));
  for (std::size_t c = 0; c < cfg.classes.size(); ++c) {
    const auto is_train = train_mask(cfg, c);
    for (std::size_t i = 0; i < cfg.samples_per_class; ++i) {
      // float round trip keeps in-memory data identical to what the files hold
      PointCloud cloud = synthesize_sample(cfg, c, i);
      cloud.points = cloud.points.cast<float>().cast<double>();
      if (is_train[i]) {
        ds.train.push_back(std::move(cloud));
        ds.train_paths.push_back(sample_path(cfg, c, i));
      } else {
        ds.test.push_back(std::move(cloud));
        ds.test_paths.push_back(sample_path(cfg, c, i));
      }
    }
  }
  return ds;
}

Dataset load_dataset(const fs::path& manifest_path) {
  const DatasetManifest m = DatasetManifest::decode(detail::read_file(manifest_path.string()));
  const fs::path root = manifest_path.parent_path();
  m.check(root);
  Dataset ds;
  ds.class_names = m.class_names;
  for (const auto& r : m.records) {
    PointCloud cloud = read_cloud(root / r.path);
    cloud.label = r.class_id;
    if (r.split == Split::kTrain) {
      ds.train.push_back(std::move(cloud));
      ds.train_paths.push_back(r.path);
    } else {
      ds.test.push_back(std::move(cloud));
      ds.test_paths.push_back(r.path);
    }
  }
  return ds;
}

}  // namespace adaptpoint
