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

#include "ir/tensor.hpp"

namespace ir {

/// Real (unaugmented) class identifier.
using ClassId = std::int32_t;

/// Channel-major image, pixels in [0, 1].
struct Image {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> pixels;

  std::size_t size() const noexcept { return channels * height * width; }
  bool same_shape(const Image& other) const noexcept {
    return channels == other.channels && height == other.height && width == other.width;
  }
  bool operator==(const Image&) const = default;
};

struct Sample {
  Image image;
  ClassId label = 0;
};

/// Labelled images sharing one shape. `classes` is sorted and unique.
struct Dataset {
  std::vector<Sample> samples;
  std::vector<ClassId> classes;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }

  /// Recomputes `classes` from the samples.
  void refresh_classes();
  /// Throws ShapeError on mixed image shapes, std::invalid_argument on a
  /// label outside `classes`.
  void validate() const;
  /// Samples whose label is in `keep` (sorted), preserving order.
  Dataset subset(std::span<const ClassId> keep) const;
};

/// Stacks same-shaped images into [n x c x h x w].
ad::Tensor stack_images(std::span<const Image* const> images);

}  // namespace ir
