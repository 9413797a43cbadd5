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

#include "ir/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "ir/error.hpp"

namespace ir::io {
namespace {

constexpr char kMagic[] = "IRCKPT1";
constexpr char kProtoTag[] = "PROTO";

void put_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xffU);
  out.write(bytes, 8);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xffU);
  out.write(bytes, 4);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

void read_exact(std::istream& in, char* dst, std::size_t n, const char* what) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw ParseError(std::string("checkpoint truncated while reading ") + what);
  }
}

std::uint64_t get_u64(std::istream& in, const char* what) {
  unsigned char bytes[8];
  read_exact(in, reinterpret_cast<char*>(bytes), 8, what);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[i];
  return v;
}

std::uint32_t get_u32(std::istream& in, const char* what) {
  unsigned char bytes[4];
  read_exact(in, reinterpret_cast<char*>(bytes), 4, what);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | bytes[i];
  return v;
}

double get_f64(std::istream& in, const char* what) {
  return std::bit_cast<double>(get_u64(in, what));
}

constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 32;

}  // namespace

Checkpoint make_checkpoint(const nn::Model& model, const cil::PrototypeBuffer* buffer) {
  Checkpoint ckpt;
  for (const nn::Parameter* p : model.parameters()) {
    NamedArray arr;
    arr.name = p->name;
    for (std::size_t d : p->value.shape()) arr.shape.push_back(d);
    arr.values.assign(p->value.data().begin(), p->value.data().end());
    ckpt.parameters.push_back(std::move(arr));
  }
  if (buffer != nullptr) {
    for (const auto& [cls, proto] : *buffer) ckpt.prototypes.push_back({cls, proto.vector});
  }
  return ckpt;
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  out.write(kMagic, 7);
  put_u64(out, ckpt.parameters.size());
  for (const NamedArray& arr : ckpt.parameters) {
    put_u32(out, static_cast<std::uint32_t>(arr.name.size()));
    out.write(arr.name.data(), static_cast<std::streamsize>(arr.name.size()));
    put_u32(out, static_cast<std::uint32_t>(arr.shape.size()));
    std::uint64_t n = 1;
    for (std::uint64_t d : arr.shape) {
      put_u64(out, d);
      n *= d;
    }
    if (n != arr.values.size()) throw ShapeError("checkpoint array " + arr.name + " shape/value mismatch");
    for (double v : arr.values) put_f64(out, v);
  }
  out.write(kProtoTag, 5);
  put_u64(out, ckpt.prototypes.size());
  for (const StoredPrototype& p : ckpt.prototypes) {
    put_u64(out, static_cast<std::uint64_t>(p.class_id));
    put_u64(out, p.values.size());
    for (double v : p.values) put_f64(out, v);
  }
  if (!out) throw std::runtime_error("checkpoint write failed");
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[7];
  read_exact(in, magic, 7, "magic");
  if (std::memcmp(magic, kMagic, 7) != 0) throw ParseError("not a checkpoint: bad magic bytes");
  Checkpoint ckpt;
  const std::uint64_t count = get_u64(in, "parameter count");
  for (std::uint64_t i = 0; i < count; ++i) {
    NamedArray arr;
    const std::uint32_t name_len = get_u32(in, "name length");
    arr.name.resize(name_len);
    read_exact(in, arr.name.data(), name_len, "parameter name");
    const std::uint32_t rank = get_u32(in, "rank");
    std::uint64_t n = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      arr.shape.push_back(get_u64(in, "dimension"));
      n *= arr.shape.back();
      if (n > kMaxElements) throw ParseError("checkpoint array " + arr.name + " is implausibly large");
    }
    arr.values.resize(n);
    for (double& v : arr.values) v = get_f64(in, "parameter values");
    ckpt.parameters.push_back(std::move(arr));
  }
  char tag[5];
  in.read(tag, 5);
  if (in.gcount() == 0) return ckpt;
  if (in.gcount() != 5 || std::memcmp(tag, kProtoTag, 5) != 0) {
    throw ParseError("checkpoint: expected PROTO section");
  }
  const std::uint64_t protos = get_u64(in, "prototype count");
  for (std::uint64_t i = 0; i < protos; ++i) {
    StoredPrototype p;
    p.class_id = static_cast<std::int64_t>(get_u64(in, "class id"));
    const std::uint64_t d = get_u64(in, "prototype dim");
    if (d > kMaxElements) throw ParseError("checkpoint prototype is implausibly large");
    p.values.resize(d);
    for (double& v : p.values) v = get_f64(in, "prototype values");
    ckpt.prototypes.push_back(std::move(p));
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_checkpoint(in);
}

void restore_parameters(nn::Model& model, const Checkpoint& ckpt) {
  auto find = [&](const std::string& name) -> const NamedArray& {
    for (const NamedArray& arr : ckpt.parameters) {
      if (arr.name == name) return arr;
    }
    throw std::invalid_argument("checkpoint has no parameter " + name);
  };
  auto to_tensor = [](const NamedArray& arr) {
    ad::Shape shape(arr.shape.begin(), arr.shape.end());
    return ad::Tensor(std::move(shape), arr.values, true);
  };
  model.set_head(to_tensor(find("head.weight")), to_tensor(find("head.bias")));
  for (nn::Parameter& p : model.extractor()) {
    const NamedArray& arr = find(p.name);
    const ad::Shape shape(arr.shape.begin(), arr.shape.end());
    if (shape != p.value.shape()) {
      throw ShapeError("checkpoint parameter " + p.name + " has shape " + ad::shape_string(shape) +
                       ", model expects " + ad::shape_string(p.value.shape()));
    }
    std::copy(arr.values.begin(), arr.values.end(), p.value.mutable_data().begin());
  }
}

cil::PrototypeBuffer restore_prototypes(const Checkpoint& ckpt, std::size_t phase) {
  cil::PrototypeBuffer buffer;
  for (const StoredPrototype& p : ckpt.prototypes) {
    buffer.insert(static_cast<ClassId>(p.class_id), p.values, phase);
  }
  return buffer;
}

}  // namespace ir::io
