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

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "ir/dataset.hpp"

namespace ir::cil {

struct Prototype {
  std::vector<double> vector;
  std::size_t phase = 0;  // phase in which the prototype was computed

  bool operator==(const Prototype&) const = default;
};

/// Real class id -> mean feature vector. Entries are write-once: a class
/// learned in an earlier phase can never be overwritten.
class PrototypeBuffer {
 public:
  using Map = std::map<ClassId, Prototype>;

  void insert(ClassId cls, std::vector<double> vector, std::size_t phase);

  bool contains(ClassId cls) const { return entries_.contains(cls); }
  const Prototype& at(ClassId cls) const;
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  /// Feature dimension, 0 while empty.
  std::size_t dim() const noexcept { return dim_; }

  Map::const_iterator begin() const noexcept { return entries_.begin(); }
  Map::const_iterator end() const noexcept { return entries_.end(); }

  bool operator==(const PrototypeBuffer&) const = default;

 private:
  Map entries_;
  std::size_t dim_ = 0;
};

/// Class of the prototype closest in Euclidean distance; ties go to the
/// smallest class id.
ClassId nearest_prototype(const PrototypeBuffer& buffer, std::span<const double> feature);

}  // namespace ir::cil
