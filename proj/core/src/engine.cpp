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

#include "ir/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "ir/error.hpp"
#include "ir/optim.hpp"

namespace ir::cil {
namespace {

constexpr std::size_t kInferenceChunk = 256;

enum SeedStream : std::uint64_t { kInitStream = 1, kAugStream = 2, kShuffleStream = 3 };

ad::Tensor stack_chunk(const Dataset& ds, std::size_t begin, std::size_t end) {
  std::vector<const Image*> images;
  images.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) images.push_back(&ds.samples[i].image);
  return stack_images(images);
}

}  // namespace

void PrototypeBuffer::insert(ClassId cls, std::vector<double> vector, std::size_t phase) {
  if (vector.empty()) throw std::invalid_argument("prototype must be non-empty");
  if (entries_.contains(cls)) {
    throw std::logic_error("prototype for class " + std::to_string(cls) +
                           " already stored; old prototypes are frozen");
  }
  if (dim_ != 0 && vector.size() != dim_) {
    throw ShapeError("prototype dimension " + std::to_string(vector.size()) +
                     " differs from buffer dimension " + std::to_string(dim_));
  }
  dim_ = vector.size();
  entries_.emplace(cls, Prototype{std::move(vector), phase});
}

const Prototype& PrototypeBuffer::at(ClassId cls) const {
  const auto it = entries_.find(cls);
  if (it == entries_.end()) {
    throw std::out_of_range("no prototype for class " + std::to_string(cls));
  }
  return it->second;
}

ClassId nearest_prototype(const PrototypeBuffer& buffer, std::span<const double> feature) {
  if (buffer.empty()) throw std::invalid_argument("nearest_prototype: empty prototype buffer");
  if (feature.size() != buffer.dim()) {
    throw ShapeError("nearest_prototype: feature has " + std::to_string(feature.size()) +
                     " dims, prototypes have " + std::to_string(buffer.dim()));
  }
  ClassId best = buffer.begin()->first;
  double best_dist = std::numeric_limits<double>::infinity();
  // Map order is ascending class id, so strict < keeps the smallest on ties.
  for (const auto& [cls, proto] : buffer) {
    double dist = 0.0;
    for (std::size_t k = 0; k < feature.size(); ++k) {
      const double diff = feature[k] - proto.vector[k];
      dist += diff * diff;
    }
    if (dist < best_dist) {
      best_dist = dist;
      best = cls;
    }
  }
  return best;
}

void PhaseConfig::validate() const {
  if (!(tau > 0.0)) throw ConfigError("tau must be > 0");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (epochs == 0) throw ConfigError("epochs must be >= 1");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (!(base_lr > 0.0)) throw ConfigError("base_lr must be > 0");
}

void TaskSequence::validate() const {
  if (phases.empty()) throw std::invalid_argument("task sequence has no phases");
  std::vector<ClassId> seen;
  for (std::size_t t = 0; t < phases.size(); ++t) {
    const Phase& p = phases[t];
    if (p.train.empty()) {
      throw std::invalid_argument("phase " + std::to_string(t) + " has no training data");
    }
    if (p.test.empty()) {
      throw std::invalid_argument("phase " + std::to_string(t) + " has no test data");
    }
    p.train.validate();
    p.test.validate();
    for (ClassId c : p.test.classes) {
      if (!std::binary_search(p.train.classes.begin(), p.train.classes.end(), c)) {
        throw std::invalid_argument("phase " + std::to_string(t) + " test class " +
                                    std::to_string(c) + " is absent from its training data");
      }
    }
    for (ClassId c : p.train.classes) {
      if (std::find(seen.begin(), seen.end(), c) != seen.end()) {
        throw std::invalid_argument("class " + std::to_string(c) +
                                    " appears in more than one phase");
      }
    }
    seen.insert(seen.end(), p.train.classes.begin(), p.train.classes.end());
  }
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t phase, std::uint64_t stream) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(base) ^ phase) ^ (stream << 32));
}

ad::Tensor feature_penalty(ad::Tape& tape, const ad::Tensor& current, const ad::Tensor& frozen,
                           Norm norm) {
  switch (norm) {
    case Norm::kL1:
      return ad::vector_lp_penalty(tape, current, frozen, 1);
    case Norm::kL2:
      return ad::vector_lp_penalty(tape, current, frozen, 2);
    case Norm::kNuclear:
      break;
  }
  return ad::nuclear_penalty(tape, current, frozen);
}

ad::Tensor space_maintenance_loss(ad::Tape& tape, const nn::Model& current,
                                  const nn::FrozenExtractor& frozen, const ad::Tensor& batch,
                                  Norm norm) {
  if (!(current.spec() == frozen.spec())) {
    throw ShapeError("space maintenance: frozen and current extractor specs differ");
  }
  const ad::Tensor live = nn::forward_features(tape, current, batch);
  return feature_penalty(tape, live, frozen.features(batch), norm);
}

TrainedPhase train_phase(nn::Model model, const nn::FrozenExtractor* frozen,
                         const aug::AugmentedDataset& data, const PhaseConfig& cfg,
                         std::size_t phase) {
  cfg.validate();
  const bool use_ce = cfg.enable_ce || phase == 0;
  const bool use_sm = cfg.enable_sm && phase > 0;
  if (!use_ce && !use_sm) {
    throw ConfigError("phase " + std::to_string(phase) +
                      ": both the CE and space maintenance terms are disabled");
  }
  if (use_sm != (frozen != nullptr)) {
    throw std::invalid_argument(use_sm ? "space maintenance needs a frozen extractor"
                                       : "frozen extractor given but space maintenance is off");
  }
  if (use_sm && !(frozen->spec() == model.spec())) {
    throw ShapeError("space maintenance: frozen and current extractor specs differ");
  }
  if (data.samples.empty()) throw std::invalid_argument("train_phase: empty dataset");
  const std::size_t classes = data.label_map.augmented_count();
  if (model.head_width() != classes) {
    throw ShapeError("train_phase: head width " + std::to_string(model.head_width()) +
                     " differs from label space " + std::to_string(classes));
  }

  TrainedPhase out{std::move(model), {}};
  nn::Model& net = out.model;
  nn::AdamState adam;
  std::vector<nn::Parameter*> params = net.parameters();
  std::mt19937_64 rng(derive_seed(cfg.rng_seed, phase, kShuffleStream));
  std::vector<std::size_t> order(data.samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = nn::lr_at_epoch(cfg.base_lr, epoch, cfg.epochs);
    std::shuffle(order.begin(), order.end(), rng);
    EpochRecord summary{lr, 0.0, 0.0, 0.0};
    std::size_t seen = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      std::vector<const Image*> images;
      std::vector<std::size_t> labels;
      images.reserve(end - begin);
      labels.reserve(end - begin);
      for (std::size_t k = begin; k < end; ++k) {
        images.push_back(&data.samples[order[k]].image);
        labels.push_back(data.samples[order[k]].label);
      }
      const ad::Tensor x = stack_images(images);

      ad::Tape tape;
      const ad::Tensor features = nn::forward_features(tape, net, x);
      ad::Tensor loss;
      BatchRecord record;
      if (use_ce) {
        const ad::Tensor logits = nn::apply_head(tape, net, features, classes);
        loss = ad::cross_entropy(tape, ad::softmax_with_temperature(tape, logits, cfg.tau), labels);
        record.ce = loss.item();
      }
      if (use_sm) {
        const ad::Tensor sm = feature_penalty(tape, features, frozen->features(x), cfg.norm);
        record.sm = sm.item();
        const ad::Tensor weighted = ad::scale(tape, sm, cfg.lambda);
        loss = loss.defined() ? ad::add(tape, loss, weighted) : weighted;
      }
      record.total = loss.item();
      if (!std::isfinite(record.total)) {
        throw NumericError("phase " + std::to_string(phase) + " epoch " + std::to_string(epoch) +
                           ": loss is not finite");
      }

      net.zero_grad();
      tape.backward(loss);
      nn::adam_step(adam, params, lr);

      const double n = static_cast<double>(end - begin);
      summary.total += record.total * n;
      summary.ce += record.ce * n;
      summary.sm += record.sm * n;
      seen += end - begin;
      out.trace.batches.push_back(record);
    }
    const double denom = static_cast<double>(seen);
    summary.total /= denom;
    summary.ce /= denom;
    summary.sm /= denom;
    out.trace.epochs.push_back(summary);
  }
  net.zero_grad();
  return out;
}

std::vector<std::vector<double>> extract_all(const nn::Model& model, const Dataset& ds) {
  std::vector<std::vector<double>> out;
  out.reserve(ds.size());
  const std::size_t d = model.embedding_dim();
  for (std::size_t begin = 0; begin < ds.size(); begin += kInferenceChunk) {
    const std::size_t end = std::min(ds.size(), begin + kInferenceChunk);
    ad::Tape tape(false);
    const ad::Tensor f = nn::forward_features(tape, model, stack_chunk(ds, begin, end));
    const auto data = f.data();
    for (std::size_t i = 0; i < end - begin; ++i) {
      out.emplace_back(data.begin() + static_cast<std::ptrdiff_t>(i * d),
                       data.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
    }
  }
  return out;
}

std::map<ClassId, std::vector<double>> compute_prototypes(const nn::Model& model,
                                                          const Dataset& ds) {
  const auto features = extract_all(model, ds);
  std::map<ClassId, std::vector<double>> sums;
  std::map<ClassId, std::size_t> counts;
  for (ClassId c : ds.classes) {
    sums[c].assign(model.embedding_dim(), 0.0);
    counts[c] = 0;
  }
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const ClassId c = ds.samples[i].label;
    auto it = sums.find(c);
    if (it == sums.end()) {
      throw std::invalid_argument("compute_prototypes: label " + std::to_string(c) +
                                  " missing from the class list");
    }
    for (std::size_t k = 0; k < features[i].size(); ++k) it->second[k] += features[i][k];
    ++counts[c];
  }
  for (auto& [c, sum] : sums) {
    if (counts[c] == 0) {
      throw std::invalid_argument("compute_prototypes: class " + std::to_string(c) +
                                  " has no samples");
    }
    for (double& v : sum) v /= static_cast<double>(counts[c]);
  }
  return sums;
}

ClassId predict_1nn(const PrototypeBuffer& buffer, const nn::Model& model, const Image& sample) {
  if (buffer.empty()) throw std::invalid_argument("predict_1nn: empty prototype buffer");
  const Image* ptr = &sample;
  ad::Tape tape(false);
  const ad::Tensor f = nn::forward_features(tape, model, stack_images({&ptr, 1}));
  return nearest_prototype(buffer, f.data());
}

std::vector<ClassId> predict_1nn(const PrototypeBuffer& buffer, const nn::Model& model,
                                 const Dataset& ds) {
  if (buffer.empty()) throw std::invalid_argument("predict_1nn: empty prototype buffer");
  std::vector<ClassId> out;
  out.reserve(ds.size());
  for (const auto& f : extract_all(model, ds)) out.push_back(nearest_prototype(buffer, f));
  return out;
}

double feature_drift(const nn::Model& current, const nn::FrozenExtractor& previous,
                     const Dataset& ds) {
  if (ds.empty()) throw std::invalid_argument("feature_drift: empty dataset");
  double total = 0.0;
  for (std::size_t begin = 0; begin < ds.size(); begin += kInferenceChunk) {
    const std::size_t end = std::min(ds.size(), begin + kInferenceChunk);
    const ad::Tensor x = stack_chunk(ds, begin, end);
    ad::Tape tape(false);
    const auto now = nn::forward_features(tape, current, x);
    const auto before = previous.features(x);
    const std::size_t d = current.embedding_dim();
    for (std::size_t i = 0; i < end - begin; ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = now.data()[i * d + k] - before.data()[i * d + k];
        acc += diff * diff;
      }
      total += std::sqrt(acc);
    }
  }
  return total / static_cast<double>(ds.size());
}

SequenceResult run_sequence(const TaskSequence& tasks, const PhaseConfig& cfg,
                            const nn::ExtractorSpec& spec) {
  tasks.validate();
  cfg.validate();
  spec.validate();
  const std::size_t phases = tasks.phases.size();
  std::optional<nn::Model> model;
  PrototypeBuffer buffer;
  eval::AccuracyMatrix accuracy(phases);
  std::vector<PhaseTrace> traces;
  std::vector<double> drift;
  std::vector<PrototypeBuffer> history;

  for (std::size_t t = 0; t < phases; ++t) {
    const Phase& phase = tasks.phases[t];
    const aug::AugmentedDataset augmented =
        aug::augment(phase.train, cfg.aug, derive_seed(cfg.rng_seed, t, kAugStream));
    nn::Model init = nn::init_phase_model(model ? &*model : nullptr, spec,
                                          augmented.label_map.augmented_count(), cfg.theta_init,
                                          derive_seed(cfg.rng_seed, t, kInitStream), t);
    std::optional<nn::FrozenExtractor> previous;
    if (t > 0) previous.emplace(nn::snapshot_frozen(*model));
    const bool use_sm = t > 0 && cfg.enable_sm;

    TrainedPhase trained =
        train_phase(std::move(init), use_sm ? &*previous : nullptr, augmented, cfg, t);
    traces.push_back(std::move(trained.trace));
    model = std::move(trained.model);

    if (t > 0) {
      drift.push_back(feature_drift(*model, *previous, tasks.phases[0].test));
    }
    for (auto& [cls, proto] : compute_prototypes(*model, phase.train)) {
      buffer.insert(cls, std::move(proto), t);
    }
    for (std::size_t j = 0; j <= t; ++j) {
      accuracy.set(t, j, eval::task_accuracy(*model, buffer, tasks.phases[j].test));
    }
    history.push_back(buffer);
  }
  return SequenceResult{std::move(*model), std::move(buffer), std::move(accuracy),
                        std::move(traces), std::move(drift), std::move(history)};
}

}  // namespace ir::cil
