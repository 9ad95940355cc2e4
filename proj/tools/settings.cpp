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

#include "settings.hpp"

#include "adaptpoint/errors.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace adaptpoint::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  for (;;) {
    const auto next = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos)));
    if (next == std::string_view::npos) return out;
    pos = next + 1;
  }
}

template <typename T>
T parse_number(std::string_view text) {
  const std::string t = trim(text);
  T v{};
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || end != t.data() + t.size()) {
    throw std::invalid_argument("'" + t + "' is not a valid number");
  }
  return v;
}

bool parse_bool(std::string_view text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw std::invalid_argument("'" + t + "' is not a boolean");
}

std::string show(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Field {
  std::string key;
  std::function<void(std::string_view)> set;
  std::function<std::string()> get;
};

template <typename T>
Field number(std::string key, T& ref) {
  return {std::move(key), [&ref](std::string_view v) { ref = parse_number<T>(v); },
          [&ref] {
            if constexpr (std::is_floating_point_v<T>) {
              return show(ref);
            } else {
              return std::to_string(ref);
            }
          }};
}

Field flag(std::string key, bool& ref) {
  return {std::move(key), [&ref](std::string_view v) { ref = parse_bool(v); },
          [&ref] { return std::string(ref ? "true" : "false"); }};
}

Field levels(std::string key, std::array<double, 5>& ref) {
  return {std::move(key),
          [&ref](std::string_view v) {
            const auto parts = split(v, ',');
            if (parts.size() != ref.size()) throw std::invalid_argument("expected 5 comma-separated values");
            for (std::size_t i = 0; i < ref.size(); ++i) ref[i] = parse_number<double>(parts[i]);
          },
          [&ref] {
            std::string out;
            for (double x : ref) out += (out.empty() ? "" : ",") + show(x);
            return out;
          }};
}

std::vector<Field> fields(Settings& s) {
  SyntheticConfig& d = s.data;
  SeverityTable& v = s.severity;
  TrainConfig& t = s.train;
  ImitatorConfig& im = t.imitator;
  ClassifierConfig& c = t.classifier;
  std::vector<Field> f{
      number("num_points", s.num_points),
      {"data.classes",
       [&d](std::string_view text) {
         d.classes.clear();
         for (const std::string& name : split(text, ',')) d.classes.push_back(parse_shape(name));
       },
       [&d] {
         std::string out;
         for (ShapeClass sc : d.classes) out += (out.empty() ? "" : ",") + std::string(shape_name(sc));
         return out;
       }},
      number("data.samples_per_class", d.samples_per_class),
      number("data.max_rotation_deg", d.max_rotation_deg),
      number("data.min_scale", d.min_scale),
      number("data.max_scale", d.max_scale),
      number("data.train_fraction", d.train_fraction),
      levels("severity.scale_bound", v.scale_bound),
      levels("severity.jitter_sigma", v.jitter_sigma),
      levels("severity.rotate_deg", v.rotate_deg),
      levels("severity.drop_global_frac", v.drop_global_frac),
      levels("severity.drop_local_frac", v.drop_local_frac),
      levels("severity.drop_local_centers", v.drop_local_centers),
      levels("severity.add_global_frac", v.add_global_frac),
      levels("severity.add_local_frac", v.add_local_frac),
      levels("severity.add_local_centers", v.add_local_centers),
      number("severity.add_local_sigma", v.add_local_sigma),
      number("severity.add_local_clip_radius", v.add_local_clip_radius),
      number("train.lambda", t.lambda),
      number("train.beta_start", t.beta_start),
      number("train.beta_end", t.beta_end),
      number("train.lr_imitator", t.lr_imitator),
      number("train.lr_discriminator", t.lr_discriminator),
      number("train.lr_classifier", t.lr_classifier),
      number("train.epochs", t.epochs),
      number("train.batch_size", t.batch_size),
      flag("train.use_feedback", t.use_feedback),
      flag("train.use_adversarial", t.use_adversarial),
      flag("train.use_deformation", t.use_deformation),
      flag("train.use_mask", t.use_mask),
      flag("train.baseline", t.baseline),
      number("imitator.num_sampled", im.num_sampled),
      number("imitator.num_anchors", im.num_anchors),
      number("imitator.width", im.width),
      number("imitator.neighbors", im.neighbors),
      number("imitator.heads", im.heads),
      number("imitator.tau", im.tau),
      number("imitator.scale_max", im.scale_max),
      number("imitator.rotation_max", im.rotation_max),
      number("imitator.translation_max", im.translation_max),
      number("imitator.mask_budget", im.mask_budget),
      number("imitator.fusion_bandwidth", im.fusion_bandwidth),
      flag("imitator.zero_init_heads", im.zero_init_heads),
      number("classifier.centers1", c.centers1),
      number("classifier.centers2", c.centers2),
      number("classifier.neighbors", c.neighbors),
      number("classifier.width1", c.width1),
      number("classifier.width2", c.width2),
      number("classifier.head_hidden", c.head_hidden),
  };
  return f;
}

}  // namespace

void Settings::resolve() {
  data.seed = seed;
  data.num_points = num_points;
  train.seed = seed;
  train.imitator.num_points = num_points;
  train.classifier.num_points = num_points;
  train.classifier.num_classes = static_cast<Eigen::Index>(data.classes.size());
  data.validate();
  severity.validate();
  train.validate();
}

void Settings::set(std::string_view key, std::string_view value) {
  for (Field& f : fields(*this)) {
    if (f.key != key) continue;
    try {
      f.set(value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config key '" + f.key + "': " + e.what());
    }
    return;
  }
  throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
}

std::map<std::string, std::string> Settings::entries() const {
  Settings copy = *this;
  std::map<std::string, std::string> out;
  for (const Field& f : fields(copy)) out.emplace(f.key, f.get());
  return out;
}

void apply_config_text(Settings& s, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(n) + ": expected key = value");
    }
    try {
      s.set(trim(std::string_view(body).substr(0, eq)), std::string_view(body).substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string(e.what()) + " (config line " + std::to_string(n) + ")");
    }
  }
}

void apply_config_file(Settings& s, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  apply_config_text(s, text.str());
}

std::string encode_run_meta(const std::string& command, const Settings& s,
                            const std::map<std::string, std::string>& extra) {
  std::string out = "command=" + command + "\n";
  out += "seed=" + std::to_string(s.seed) + "\n";
  out += "threads=" + std::to_string(s.threads) + "\n";
  for (const auto& [k, v] : extra) out += k + "=" + v + "\n";
  for (const auto& [k, v] : s.entries()) out += k + "=" + v + "\n";
  return out;
}

}  // namespace adaptpoint::cli
