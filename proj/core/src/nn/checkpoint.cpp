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

#include "adaptpoint/nn/checkpoint.hpp"

#include "../le_io.hpp"

#include <cmath>
#include <stdexcept>

namespace adaptpoint::nn {

std::string encode_checkpoint(const std::vector<const Parameter*>& params) {
  std::string out(kCheckpointMagic);
  for (const Parameter* p : params) {
    detail::put_u32(out, static_cast<std::uint32_t>(p->name.size()));
    out += p->name;
    detail::put_u32(out, 2);
    detail::put_u32(out, static_cast<std::uint32_t>(p->value.rows()));
    detail::put_u32(out, static_cast<std::uint32_t>(p->value.cols()));
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      detail::put_f32(out, static_cast<float>(p->value.data()[i]));
    }
  }
  return out;
}

std::vector<TensorRecord> decode_checkpoint(const std::string& bytes) {
  detail::ByteReader in(bytes);
  const std::string magic(kCheckpointMagic);
  if (in.bytes(magic.size(), "checkpoint header") != magic) throw ParseError("bad checkpoint magic", 0);
  std::vector<TensorRecord> records;
  while (!in.at_end()) {
    const std::size_t start = in.offset();
    TensorRecord rec;
    const std::uint32_t len = in.u32("name length");
    rec.name = in.bytes(len, "name");
    const std::uint32_t rank = in.u32("rank");
    if (rank == 0 || rank > 2) throw ParseError("unsupported tensor rank " + std::to_string(rank), start);
    std::uint32_t rows = 1, cols = 1;
    if (rank == 1) {
      cols = in.u32("dims");
    } else {
      rows = in.u32("dims");
      cols = in.u32("dims");
    }
    const std::uint64_t count = static_cast<std::uint64_t>(rows) * cols;
    if (count * 4 > in.remaining()) throw ParseError("truncated tensor " + rec.name, in.offset());
    rec.value.resize(rows, cols);
    for (std::uint64_t i = 0; i < count; ++i) {
      const std::size_t at = in.offset();
      const float f = in.f32("values");
      if (!std::isfinite(f)) throw ParseError("non-finite value in " + rec.name, at);
      rec.value.data()[i] = static_cast<double>(f);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

void save_checkpoint(const std::string& path, const std::vector<const Parameter*>& params) {
  detail::write_file(path, encode_checkpoint(params));
}

std::vector<TensorRecord> load_checkpoint(const std::string& path) {
  return decode_checkpoint(detail::read_file(path));
}

std::size_t assign_records(const std::vector<TensorRecord>& records, ParameterStore& store,
                           const std::string& prefix) {
  std::size_t assigned = 0;
  for (const TensorRecord& rec : records) {
    if (!rec.name.starts_with(prefix)) continue;
    Parameter* p = store.find(rec.name);
    if (p == nullptr) throw std::invalid_argument("checkpoint tensor has no parameter: " + rec.name);
    if (p->value.rows() != rec.value.rows() || p->value.cols() != rec.value.cols()) {
      throw std::invalid_argument("checkpoint shape mismatch for " + rec.name);
    }
    p->value = rec.value;
    ++assigned;
  }
  return assigned;
}

}  // namespace adaptpoint::nn
