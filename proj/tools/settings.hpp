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
#include "adaptpoint/data_io.hpp"
#include "adaptpoint/training.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>

namespace adaptpoint::cli {

/// Every tunable default, addressable as `group.field` in a config file.
struct Settings {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::size_t num_points = 256;
  SyntheticConfig data;
  SeverityTable severity;
  TrainConfig train;

  /// Copies the shared fields (seed, point count) into the nested configs and
  /// validates them. Throws std::invalid_argument.
  void resolve();

  /// Sets one key from its text value. Throws std::invalid_argument naming
  /// the key when it is unknown or the value does not parse.
  void set(std::string_view key, std::string_view value);

  /// Every key with its current value, sorted by key.
  std::map<std::string, std::string> entries() const;
};

/// Applies a config file: one `key = value` per line, `#` starts a comment.
/// Errors name the key and the line number.
void apply_config_text(Settings& s, const std::string& text);
void apply_config_file(Settings& s, const std::filesystem::path& path);

/// The resolved configuration of a run, one `key=value` per line, led by the
/// command name.
std::string encode_run_meta(const std::string& command, const Settings& s,
                            const std::map<std::string, std::string>& extra = {});

inline constexpr std::string_view kRunMetaName = "run.meta";

}  // namespace adaptpoint::cli
