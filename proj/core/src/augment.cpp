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

#include "ir/augment.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <string>

#include "ir/error.hpp"

namespace ir {

void Dataset::refresh_classes() {
  classes.clear();
  for (const Sample& s : samples) classes.push_back(s.label);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
}

void Dataset::validate() const {
  if (!std::is_sorted(classes.begin(), classes.end()) ||
      std::adjacent_find(classes.begin(), classes.end()) != classes.end()) {
    throw std::invalid_argument("dataset class list must be sorted and unique");
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    if (!s.image.same_shape(samples.front().image) || s.image.pixels.size() != s.image.size()) {
      throw ShapeError("dataset sample " + std::to_string(i) + " has a different image shape");
    }
    if (!std::binary_search(classes.begin(), classes.end(), s.label)) {
      throw std::invalid_argument("dataset sample " + std::to_string(i) + " has label " +
                                  std::to_string(s.label) + " outside the class set");
    }
  }
}

Dataset Dataset::subset(std::span<const ClassId> keep) const {
  Dataset out;
  for (const Sample& s : samples) {
    if (std::binary_search(keep.begin(), keep.end(), s.label)) out.samples.push_back(s);
  }
  out.refresh_classes();
  return out;
}

ad::Tensor stack_images(std::span<const Image* const> images) {
  if (images.empty()) throw ShapeError("stack_images: no images");
  const Image& first = *images.front();
  const std::size_t n = first.size();
  std::vector<double> data;
  data.reserve(images.size() * n);
  for (const Image* img : images) {
    if (!img->same_shape(first)) throw ShapeError("stack_images: mixed image shapes");
    data.insert(data.end(), img->pixels.begin(), img->pixels.end());
  }
  return ad::Tensor({images.size(), first.channels, first.height, first.width}, std::move(data));
}

}  // namespace ir

namespace ir::aug {

LabelMap::LabelMap(AugKind kind, std::vector<ClassId> classes)
    : kind_(kind), classes_(std::move(classes)) {
  std::sort(classes_.begin(), classes_.end());
  if (std::adjacent_find(classes_.begin(), classes_.end()) != classes_.end()) {
    throw std::invalid_argument("LabelMap: duplicate class ids");
  }
  if (classes_.empty()) throw std::invalid_argument("LabelMap: empty class set");
}

std::size_t LabelMap::augmented_count() const noexcept {
  const std::size_t n = classes_.size();
  switch (kind_) {
    case AugKind::kRotation:
      return 4 * n;
    case AugKind::kMixup:
      return (n + n * n) / 2;
    case AugKind::kNone:
      break;
  }
  return n;
}

std::size_t LabelMap::position(ClassId c) const {
  const auto it = std::lower_bound(classes_.begin(), classes_.end(), c);
  if (it == classes_.end() || *it != c) {
    throw std::invalid_argument("class " + std::to_string(c) + " is not in the label map");
  }
  return static_cast<std::size_t>(it - classes_.begin());
}

std::size_t LabelMap::real_label(ClassId c) const {
  return kind_ == AugKind::kRotation ? rotation_label(c, 0) : position(c);
}

std::size_t LabelMap::rotation_label(ClassId c, int k) const {
  if (kind_ != AugKind::kRotation) throw std::logic_error("rotation_label on a non-rotation map");
  if (k < 0 || k > 3) throw std::invalid_argument("rotation index must be in {0,1,2,3}");
  return 4 * position(c) + static_cast<std::size_t>(k);
}

std::size_t LabelMap::pair_label(ClassId a, ClassId b) const {
  if (kind_ != AugKind::kMixup) throw std::logic_error("pair_label on a non-mixup map");
  return pair_class_id(a, b, classes_);
}

std::size_t pair_class_id(ClassId a, ClassId b, std::span<const ClassId> classes) {
  if (a == b) throw std::invalid_argument("pair_class_id: classes must differ");
  auto pos = [&](ClassId c) {
    const auto it = std::lower_bound(classes.begin(), classes.end(), c);
    if (it == classes.end() || *it != c) {
      throw std::invalid_argument("pair_class_id: class " + std::to_string(c) +
                                  " not in class set");
    }
    return static_cast<std::size_t>(it - classes.begin());
  };
  std::size_t i = pos(a), j = pos(b);
  if (i > j) std::swap(i, j);
  const std::size_t n = classes.size();
  // Pairs (0,1) .. (0,n-1), (1,2) .. : row i starts after i*n - i(i+1)/2 pairs.
  return n + i * n - i * (i + 1) / 2 + (j - i - 1);
}

Image rotate90(const Image& image, int k) {
  if (image.height != image.width) {
    throw ShapeError("rotate90: image must be square, got " + std::to_string(image.height) + "x" +
                     std::to_string(image.width));
  }
  k = ((k % 4) + 4) % 4;
  Image current = image;
  const std::size_t n = image.width;
  for (int step = 0; step < k; ++step) {
    Image next = current;
    for (std::size_t c = 0; c < image.channels; ++c) {
      const double* src = current.pixels.data() + c * n * n;
      double* dst = next.pixels.data() + c * n * n;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) dst[i * n + j] = src[j * n + (n - 1 - i)];
    }
    current = std::move(next);
  }
  return current;
}

AugmentedDataset augment_rotation(const Dataset& ds) {
  AugmentedDataset out{{}, LabelMap(AugKind::kRotation, ds.classes)};
  out.samples.reserve(4 * ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const Sample& s = ds.samples[i];
    for (int k = 0; k < 4; ++k) {
      Provenance prov;
      prov.kind = k == 0 ? Provenance::Kind::kOriginal : Provenance::Kind::kRotated;
      prov.rotation = k;
      prov.first = i;
      out.samples.push_back({rotate90(s.image, k), out.label_map.rotation_label(s.label, k), prov});
    }
  }
  return out;
}

AugmentedDataset augment_mixup(const Dataset& ds, std::uint64_t seed) {
  if (ds.classes.size() < 2) {
    throw std::invalid_argument("augment_mixup: needs at least two classes, got " +
                                std::to_string(ds.classes.size()));
  }
  AugmentedDataset out{{}, LabelMap(AugKind::kMixup, ds.classes)};
  const std::size_t n = ds.size();
  out.samples.reserve(4 * n);
  for (std::size_t i = 0; i < n; ++i) {
    Provenance prov;
    prov.first = i;
    out.samples.push_back({ds.samples[i].image, out.label_map.real_label(ds.samples[i].label), prov});
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::uniform_real_distribution<double> alpha_dist(kMixupAlphaMin, kMixupAlphaMax);
  for (std::size_t m = 0; m < 3 * n; ++m) {
    const std::size_t i = pick(rng);
    std::size_t j = pick(rng);
    while (ds.samples[j].label == ds.samples[i].label) j = pick(rng);
    const double alpha = alpha_dist(rng);
    const Image& xi = ds.samples[i].image;
    const Image& xj = ds.samples[j].image;
    Image mixed = xi;
    for (std::size_t p = 0; p < mixed.pixels.size(); ++p) {
      mixed.pixels[p] = alpha * xi.pixels[p] + (1.0 - alpha) * xj.pixels[p];
    }
    Provenance prov{Provenance::Kind::kMixed, 0, i, j, alpha};
    out.samples.push_back(
        {std::move(mixed), out.label_map.pair_label(ds.samples[i].label, ds.samples[j].label), prov});
  }
  return out;
}

AugmentedDataset augment_none(const Dataset& ds) {
  AugmentedDataset out{{}, LabelMap(AugKind::kNone, ds.classes)};
  out.samples.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    Provenance prov;
    prov.first = i;
    out.samples.push_back({ds.samples[i].image, out.label_map.real_label(ds.samples[i].label), prov});
  }
  return out;
}

AugmentedDataset augment(const Dataset& ds, AugKind kind, std::uint64_t seed) {
  switch (kind) {
    case AugKind::kRotation:
      return augment_rotation(ds);
    case AugKind::kMixup:
      return augment_mixup(ds, seed);
    case AugKind::kNone:
      break;
  }
  return augment_none(ds);
}

}  // namespace ir::aug
