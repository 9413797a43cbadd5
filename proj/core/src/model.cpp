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

#include "ir/model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "ir/error.hpp"

namespace ir::nn {
namespace {

ad::Tensor kaiming_uniform(ad::Shape shape, std::size_t fan_in, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> data(ad::shape_numel(shape));
  for (double& v : data) v = dist(rng);
  return ad::Tensor(std::move(shape), std::move(data), true);
}

std::vector<Parameter> deep_copy(std::span<const Parameter> params, bool requires_grad) {
  std::vector<Parameter> out;
  out.reserve(params.size());
  for (const Parameter& p : params) {
    ad::Tensor copy = p.value.clone();
    copy.set_requires_grad(requires_grad);
    out.push_back({p.name, std::move(copy)});
  }
  return out;
}

Parameter copy_param(const Parameter& p) { return {p.name, p.value.clone()}; }

std::vector<Parameter> init_extractor(const ExtractorSpec& spec, std::mt19937_64& rng) {
  std::vector<Parameter> params;
  std::size_t ch = spec.channels, h = spec.height, w = spec.width, flat = 0;
  bool flattened = false;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& layer = spec.layers[i];
    const std::string prefix = "extractor." + std::to_string(i) + ".";
    switch (layer.kind) {
      case LayerKind::kConvRelu:
        params.push_back({prefix + "weight", kaiming_uniform({layer.width, ch, 3, 3}, ch * 9, rng)});
        params.push_back({prefix + "bias", ad::Tensor::zeros({layer.width}, true)});
        ch = layer.width;
        break;
      case LayerKind::kMaxPool:
        h /= 2;
        w /= 2;
        break;
      case LayerKind::kFlatten:
        flat = ch * h * w;
        flattened = true;
        break;
      case LayerKind::kLinearRelu: {
        const std::size_t in = flattened ? flat : ch * h * w;
        params.push_back({prefix + "weight", kaiming_uniform({in, layer.width}, in, rng)});
        params.push_back({prefix + "bias", ad::Tensor::zeros({layer.width}, true)});
        flat = layer.width;
        break;
      }
    }
  }
  return params;
}

}  // namespace

ExtractorSpec ExtractorSpec::desk_default(std::size_t channels, std::size_t side,
                                          std::size_t embedding_dim) {
  ExtractorSpec spec;
  spec.channels = channels;
  spec.height = side;
  spec.width = side;
  spec.layers = {{LayerKind::kConvRelu, 8},   {LayerKind::kMaxPool, 0},
                 {LayerKind::kConvRelu, 16},  {LayerKind::kMaxPool, 0},
                 {LayerKind::kFlatten, 0},    {LayerKind::kLinearRelu, embedding_dim}};
  return spec;
}

void ExtractorSpec::validate() const {
  (void)embedding_dim();
}

std::size_t ExtractorSpec::embedding_dim() const {
  if (channels == 0 || height == 0 || width == 0) {
    throw ShapeError("extractor input shape must be positive");
  }
  std::size_t ch = channels, h = height, w = width, features = 0;
  bool flat = false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& layer = layers[i];
    const std::string where = "extractor layer " + std::to_string(i) + ": ";
    switch (layer.kind) {
      case LayerKind::kConvRelu:
        if (flat) throw ShapeError(where + "conv2d after flatten");
        if (layer.width == 0) throw ShapeError(where + "conv2d needs at least one kernel");
        if (h < 3 || w < 3) throw ShapeError(where + "conv2d needs spatial dims >= 3");
        ch = layer.width;
        break;
      case LayerKind::kMaxPool:
        if (flat) throw ShapeError(where + "maxpool after flatten");
        if (h % 2 != 0 || w % 2 != 0) throw ShapeError(where + "maxpool needs even spatial dims");
        h /= 2;
        w /= 2;
        break;
      case LayerKind::kFlatten:
        if (flat) throw ShapeError(where + "flatten applied twice");
        flat = true;
        features = ch * h * w;
        break;
      case LayerKind::kLinearRelu:
        if (!flat) throw ShapeError(where + "linear layer before flatten");
        if (layer.width == 0) throw ShapeError(where + "linear layer needs positive width");
        features = layer.width;
        break;
    }
  }
  if (!flat) throw ShapeError("extractor must end in a flat feature vector");
  return features;
}

Model::Model(ExtractorSpec spec, std::size_t head_width, std::uint64_t seed)
    : spec_(std::move(spec)), embedding_dim_(spec_.embedding_dim()) {
  if (head_width == 0) throw std::invalid_argument("head width must be >= 1");
  reinitialize_extractor(seed);
  reset_head(head_width, seed ^ 0x9e3779b97f4a7c15ULL);
}

Model::Model(const Model& other)
    : spec_(other.spec_),
      embedding_dim_(other.embedding_dim_),
      extractor_(deep_copy(other.extractor_, true)),
      head_weight_(copy_param(other.head_weight_)),
      head_bias_(copy_param(other.head_bias_)) {}

Model& Model::operator=(const Model& other) {
  if (this != &other) {
    Model copy(other);
    *this = std::move(copy);
  }
  return *this;
}

std::vector<Parameter*> Model::parameters() {
  std::vector<Parameter*> out;
  for (Parameter& p : extractor_) out.push_back(&p);
  out.push_back(&head_weight_);
  out.push_back(&head_bias_);
  return out;
}

std::vector<const Parameter*> Model::parameters() const {
  std::vector<const Parameter*> out;
  for (const Parameter& p : extractor_) out.push_back(&p);
  out.push_back(&head_weight_);
  out.push_back(&head_bias_);
  return out;
}

void Model::reinitialize_extractor(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  extractor_ = init_extractor(spec_, rng);
}

void Model::reset_head(std::size_t width, std::uint64_t seed) {
  if (width == 0) throw std::invalid_argument("head width must be >= 1");
  std::mt19937_64 rng(seed);
  head_weight_ = {"head.weight", kaiming_uniform({embedding_dim_, width}, embedding_dim_, rng)};
  head_bias_ = {"head.bias", ad::Tensor::zeros({width}, true)};
}

void Model::set_head(ad::Tensor weight, ad::Tensor bias) {
  if (weight.rank() != 2 || weight.dim(0) != embedding_dim_ || bias.numel() != weight.dim(1)) {
    throw ShapeError("set_head: expected [" + std::to_string(embedding_dim_) +
                     " x width] weight and [width] bias, got " + ad::shape_string(weight.shape()) +
                     " and " + ad::shape_string(bias.shape()));
  }
  weight.set_requires_grad(true);
  bias.set_requires_grad(true);
  head_weight_ = {"head.weight", std::move(weight)};
  head_bias_ = {"head.bias", std::move(bias)};
}

void Model::zero_grad() {
  for (Parameter* p : parameters()) p->value.clear_grad();
}

ad::Tensor extract_features(ad::Tape& tape, const ExtractorSpec& spec,
                            std::span<const Parameter> params, const ad::Tensor& batch) {
  if (batch.rank() != 4 || batch.dim(1) != spec.channels || batch.dim(2) != spec.height ||
      batch.dim(3) != spec.width) {
    throw ShapeError("extractor expects [batch x " + std::to_string(spec.channels) + " x " +
                     std::to_string(spec.height) + " x " + std::to_string(spec.width) +
                     "], got " + ad::shape_string(batch.shape()));
  }
  const std::size_t n = batch.dim(0);
  ad::Tensor x = batch;
  std::size_t next = 0;
  for (const LayerSpec& layer : spec.layers) {
    switch (layer.kind) {
      case LayerKind::kConvRelu:
        x = ad::relu(tape, ad::conv2d(tape, x, params[next].value, params[next + 1].value,
                                      ad::Padding::kSame));
        next += 2;
        break;
      case LayerKind::kMaxPool:
        x = ad::maxpool2d(tape, x);
        break;
      case LayerKind::kFlatten:
        x = ad::reshape(tape, x, {n, x.numel() / n});
        break;
      case LayerKind::kLinearRelu:
        x = ad::relu(tape, ad::add_row_bias(tape, ad::matmul(tape, x, params[next].value),
                                            params[next + 1].value));
        next += 2;
        break;
    }
  }
  return x;
}

ad::Tensor forward_features(ad::Tape& tape, const Model& model, const ad::Tensor& batch) {
  return extract_features(tape, model.spec(), model.extractor(), batch);
}

ad::Tensor apply_head(ad::Tape& tape, const Model& model, const ad::Tensor& features,
                      std::size_t expected_classes) {
  if (model.head_width() != expected_classes) {
    throw ShapeError("head has " + std::to_string(model.head_width()) +
                     " outputs but the label space has " + std::to_string(expected_classes) +
                     " classes");
  }
  return ad::add_row_bias(tape, ad::matmul(tape, features, model.head_weight().value),
                          model.head_bias().value);
}

ad::Tensor forward_logits(ad::Tape& tape, const Model& model, const ad::Tensor& batch,
                          std::size_t expected_classes) {
  if (model.head_width() != expected_classes) {
    throw ShapeError("head has " + std::to_string(model.head_width()) +
                     " outputs but the label space has " + std::to_string(expected_classes) +
                     " classes");
  }
  return apply_head(tape, model, forward_features(tape, model, batch), expected_classes);
}

FrozenExtractor::FrozenExtractor(const Model& source)
    : spec_(source.spec()), params_(deep_copy(source.extractor(), false)) {}

ad::Tensor FrozenExtractor::features(const ad::Tensor& batch) const {
  ad::Tape tape(false);
  return extract_features(tape, spec_, params_, batch);
}

FrozenExtractor snapshot_frozen(const Model& model) { return FrozenExtractor(model); }

Model init_phase_model(const Model* prev, const ExtractorSpec& spec, std::size_t head_width,
                       InitPolicy policy, std::uint64_t seed, std::size_t phase) {
  if (prev == nullptr) {
    if (phase > 0 && policy == InitPolicy::kWarm) {
      throw std::invalid_argument("warm initialisation at phase " + std::to_string(phase) +
                                  " needs the previous phase's model");
    }
    return Model(spec, head_width, seed);
  }
  if (!(prev->spec() == spec)) throw ShapeError("init_phase_model: extractor spec changed");
  Model model(*prev);
  if (policy == InitPolicy::kRandom) model.reinitialize_extractor(seed);
  if (model.head_width() != head_width) {
    model.reset_head(head_width, seed ^ 0x9e3779b97f4a7c15ULL);
  }
  return model;
}

}  // namespace ir::nn
