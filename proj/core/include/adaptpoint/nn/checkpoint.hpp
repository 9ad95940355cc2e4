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

#include "adaptpoint/nn/graph.hpp"

#include <string>
#include <vector>

namespace adaptpoint::nn {

/// Binary checkpoint container.
///
///   "ADPT-CKPT v1\n"
///   repeated until end of file:
///     u32 name length, name bytes,
///     u32 rank, rank x u32 dims,
///     prod(dims) x f32 values (row-major)
///
/// All integers and floats are little-endian. Values are stored as 32-bit
/// floats, so a load after save reproduces parameters to float precision.
inline constexpr char kCheckpointMagic[] = "ADPT-CKPT v1\n";

struct TensorRecord {
  std::string name;
  Matrix value;
};

std::string encode_checkpoint(const std::vector<const Parameter*>& params);
std::vector<TensorRecord> decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::string& path, const std::vector<const Parameter*>& params);
std::vector<TensorRecord> load_checkpoint(const std::string& path);

/// Copies every record whose name starts with `prefix` into the parameter of
/// the same name. Throws std::invalid_argument on a missing parameter or a
/// shape mismatch; returns the number of tensors assigned.
std::size_t assign_records(const std::vector<TensorRecord>& records, ParameterStore& store,
                           const std::string& prefix);

}  // namespace adaptpoint::nn
