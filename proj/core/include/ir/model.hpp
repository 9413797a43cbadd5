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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ir/ops.hpp"
#include "ir/tensor.hpp"

namespace ir::nn {

enum class LayerKind { kConvRelu, kMaxPool, kFlatten, kLinearRelu };

/// One extractor stage. `width` is the output channel count for
/// kConvRelu and the output feature count for kLinearRelu.
struct LayerSpec {
  LayerKind kind;
  std::size_t width = 0;

  bool operator==(const LayerSpec&) const = default;
};

struct ExtractorSpec {
  std::size_t channels = 1;
  std::size_t height = 16;
  std::size_t width = 16;
  std::vector<LayerSpec> layers;

  /// conv(8)+relu, pool, conv(16)+relu, pool, flatten, linear(d)+relu.
  static ExtractorSpec desk_default(std::size_t channels, std::size_t side,
                                    std::size_t embedding_dim = 32);

  /// Walks the layer chain; throws ShapeError when a stage cannot consume
  /// its predecessor's output.
  void validate() const;
  std::size_t embedding_dim() const;

  bool operator==(const ExtractorSpec&) const = default;
};

struct Parameter {
  std::string name;
  ad::Tensor value;
};

enum class InitPolicy { kWarm, kRandom };

/// Feature extractor plus a transient linear head of `head_width` outputs.
/// Copies are deep.
class Model {
 public:
  Model(ExtractorSpec spec, std::size_t head_width, std::uint64_t seed);

  Model(const Model& other);
  Model& operator=(const Model& other);
  Model(Model&&) noexcept = default;
  Model& operator=(Model&&) noexcept = default;

  const ExtractorSpec& spec() const noexcept { return spec_; }
  std::size_t embedding_dim() const noexcept { return embedding_dim_; }
  std::size_t head_width() const noexcept { return head_weight_.value.dim(1); }

  std::span<const Parameter> extractor() const noexcept { return extractor_; }
  std::span<Parameter> extractor() noexcept { return extractor_; }
  const Parameter& head_weight() const noexcept { return head_weight_; }
  const Parameter& head_bias() const noexcept { return head_bias_; }

  /// Extractor parameters followed by head weight and bias.
  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;

  void reinitialize_extractor(std::uint64_t seed);
  void reset_head(std::size_t width, std::uint64_t seed);
  /// Replaces head parameters; shapes must be [d x width] and [width].
  void set_head(ad::Tensor weight, ad::Tensor bias);

  void zero_grad();

 private:
  ExtractorSpec spec_;
  std::size_t embedding_dim_ = 0;
  std::vector<Parameter> extractor_;
  Parameter head_weight_;
  Parameter head_bias_;
};

/// Runs the extractor stages over [batch x c x h x w], returning [batch x d].
ad::Tensor extract_features(ad::Tape& tape, const ExtractorSpec& spec,
                            std::span<const Parameter> params, const ad::Tensor& batch);

ad::Tensor forward_features(ad::Tape& tape, const Model& model, const ad::Tensor& batch);

/// Head applied to precomputed features. `expected_classes` is the current
/// label-space size; a head of any other width is rejected.
ad::Tensor apply_head(ad::Tape& tape, const Model& model, const ad::Tensor& features,
                      std::size_t expected_classes);

ad::Tensor forward_logits(ad::Tape& tape, const Model& model, const ad::Tensor& batch,
                          std::size_t expected_classes);

/// Immutable copy of a model's extractor. Its parameters never require
/// gradients, so nothing downstream of features() can push gradient into it.
class FrozenExtractor {
 public:
  explicit FrozenExtractor(const Model& source);

  const ExtractorSpec& spec() const noexcept { return spec_; }
  std::span<const Parameter> parameters() const noexcept { return params_; }
  ad::Tensor features(const ad::Tensor& batch) const;

 private:
  ExtractorSpec spec_;
  std::vector<Parameter> params_;
};

FrozenExtractor snapshot_frozen(const Model& model);

/// Model for a new phase. Without `prev` the model is fresh. With `prev`,
/// kWarm copies its extractor and kRandom draws a new one; the head is
/// copied only when `prev` has exactly `head_width` outputs.
Model init_phase_model(const Model* prev, const ExtractorSpec& spec, std::size_t head_width,
                       InitPolicy policy, std::uint64_t seed, std::size_t phase);

}  // namespace ir::nn
