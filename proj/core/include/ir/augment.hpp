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
#include <cstdint>
#include <span>
#include <vector>

#include "ir/dataset.hpp"

/// Label-expanding dataset augmentation: every transformed copy is assigned
/// to a class of its own in the expanded label space.
namespace ir::aug {

enum class AugKind { kNone, kRotation, kMixup };

/// Maps real classes and transforms into the expanded label space.
///
/// Real classes are addressed by their position in the sorted class list.
/// rotation: label(c, k) = 4 * pos(c) + k, |expanded| = 4|C|.
/// mixup: label(c) = pos(c); label of the unordered pair {a, b} is |C| plus
/// its lexicographic rank among all pairs, |expanded| = (|C| + |C|^2) / 2.
/// none: label(c) = pos(c).
class LabelMap {
 public:
  LabelMap(AugKind kind, std::vector<ClassId> classes);

  AugKind kind() const noexcept { return kind_; }
  std::span<const ClassId> classes() const noexcept { return classes_; }
  std::size_t real_count() const noexcept { return classes_.size(); }
  std::size_t augmented_count() const noexcept;

  std::size_t position(ClassId c) const;
  /// Label of an untransformed sample (the k = 0 alias for rotation).
  std::size_t real_label(ClassId c) const;
  std::size_t rotation_label(ClassId c, int k) const;
  std::size_t pair_label(ClassId a, ClassId b) const;

 private:
  AugKind kind_;
  std::vector<ClassId> classes_;
};

/// Augmented id of the unordered pair {a, b}; symmetric, throws when a == b
/// or either class is missing from `classes`.
std::size_t pair_class_id(ClassId a, ClassId b, std::span<const ClassId> classes);

struct Provenance {
  enum class Kind { kOriginal, kRotated, kMixed };
  Kind kind = Kind::kOriginal;
  int rotation = 0;
  std::size_t first = 0;   // source sample index
  std::size_t second = 0;  // second parent for kMixed
  double alpha = 1.0;      // weight on `first` for kMixed
};

struct AugmentedSample {
  Image image;
  std::size_t label = 0;
  Provenance provenance;
};

struct AugmentedDataset {
  std::vector<AugmentedSample> samples;
  LabelMap label_map;
};

inline constexpr double kMixupAlphaMin = 0.4;
inline constexpr double kMixupAlphaMax = 0.6;

/// Counter-clockwise rotation by k * 90 degrees of a square image:
/// out[c][i][j] = in[c][j][w-1-i], applied k times.
Image rotate90(const Image& image, int k);

/// Each sample in the four orientations, 4N samples in total.
AugmentedDataset augment_rotation(const Dataset& ds);

/// N originals under their real labels plus 3N convex mixtures of
/// different-class pairs, alpha ~ U[0.4, 0.6] per mixed sample.
AugmentedDataset augment_mixup(const Dataset& ds, std::uint64_t seed);

/// The dataset as-is under the identity label map.
AugmentedDataset augment_none(const Dataset& ds);

AugmentedDataset augment(const Dataset& ds, AugKind kind, std::uint64_t seed);

}  // namespace ir::aug
