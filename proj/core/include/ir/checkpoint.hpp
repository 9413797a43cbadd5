// Copyright 2026 The Incremental Representation Authors. All Rights Reserved.
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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ir/model.hpp"
#include "ir/prototypes.hpp"

/// Binary checkpoint container, all integers and floats little-endian:
///
///   "IRCKPT1"                       7 bytes
///   u64 parameter count
///   per parameter:
///     u32 name length, name bytes
///     u32 rank, u64 dims[rank]
///     f64 values[prod(dims)]
///   "PROTO"                         5 bytes
///   u64 prototype count
///   per prototype: i64 class id, u64 d, f64 values[d]
namespace ir::io {

struct NamedArray {
  std::string name;
  std::vector<std::uint64_t> shape;
  std::vector<double> values;

  bool operator==(const NamedArray&) const = default;
};

struct StoredPrototype {
  std::int64_t class_id = 0;
  std::vector<double> values;

  bool operator==(const StoredPrototype&) const = default;
};

struct Checkpoint {
  std::vector<NamedArray> parameters;
  std::vector<StoredPrototype> prototypes;

  bool operator==(const Checkpoint&) const = default;
};

Checkpoint make_checkpoint(const nn::Model& model, const cil::PrototypeBuffer* buffer = nullptr);

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies stored parameters into `model` by name. The head is resized to the
/// stored width; every other shape must match exactly.
void restore_parameters(nn::Model& model, const Checkpoint& ckpt);

/// Prototypes are tagged with `phase` since the file does not record it.
cil::PrototypeBuffer restore_prototypes(const Checkpoint& ckpt, std::size_t phase = 0);

}  // namespace ir::io
