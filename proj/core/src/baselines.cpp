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

#include "ir/baselines.hpp"

#include <algorithm>
#include <stdexcept>

#include "ir/error.hpp"

namespace ir::cil {
namespace {

/// Head over `now` keeping the columns of classes already in `before`.
void grow_head(nn::Model& model, std::span<const ClassId> before, std::span<const ClassId> now,
               std::uint64_t seed) {
  const ad::Tensor old_w = model.head_weight().value.clone();
  const ad::Tensor old_b = model.head_bias().value.clone();
  model.reset_head(now.size(), seed);
  if (before.empty()) return;
  const std::size_t d = model.embedding_dim();
  const std::size_t old_n = before.size(), new_n = now.size();
  auto w = model.head_weight().value.mutable_data();
  auto b = model.head_bias().value.mutable_data();
  for (std::size_t col = 0; col < new_n; ++col) {
    const auto it = std::lower_bound(before.begin(), before.end(), now[col]);
    if (it == before.end() || *it != now[col]) continue;
    const std::size_t src = static_cast<std::size_t>(it - before.begin());
    for (std::size_t r = 0; r < d; ++r) w[r * new_n + col] = old_w.data()[r * old_n + src];
    b[col] = old_b.data()[src];
  }
}

Dataset merge(const Dataset& a, const Dataset& b) {
  Dataset out = a;
  out.samples.insert(out.samples.end(), b.samples.begin(), b.samples.end());
  out.refresh_classes();
  return out;
}

SequenceResult run_head_baseline(const TaskSequence& tasks, const PhaseConfig& base_cfg,
                                 const nn::ExtractorSpec& spec, bool joint) {
  tasks.validate();
  spec.validate();
  PhaseConfig cfg = base_cfg;
  cfg.enable_ce = true;
  cfg.enable_sm = false;
  cfg.aug = aug::AugKind::kNone;
  cfg.validate();

  const std::size_t phases = tasks.phases.size();
  std::optional<nn::Model> model;
  std::vector<ClassId> seen;
  Dataset seen_data;
  eval::AccuracyMatrix accuracy(phases);
  std::vector<PhaseTrace> traces;

  for (std::size_t t = 0; t < phases; ++t) {
    const Phase& phase = tasks.phases[t];
    std::vector<ClassId> now = seen;
    now.insert(now.end(), phase.train.classes.begin(), phase.train.classes.end());
    std::sort(now.begin(), now.end());
    seen_data = t == 0 ? phase.train : merge(seen_data, phase.train);

    const std::uint64_t init_seed = derive_seed(cfg.rng_seed, t, 1);
    nn::Model net = model ? nn::Model(*model) : nn::Model(spec, now.size(), init_seed);
    if (model) {
      if (cfg.theta_init == nn::InitPolicy::kRandom) net.reinitialize_extractor(init_seed);
      grow_head(net, seen, now, init_seed ^ 0x9e3779b97f4a7c15ULL);
    }

    // Labels index the sorted cumulative class list, matching head columns.
    const Dataset& train = joint ? seen_data : phase.train;
    aug::AugmentedDataset data{{}, aug::LabelMap(aug::AugKind::kNone, now)};
    data.samples.reserve(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
      aug::Provenance prov;
      prov.first = i;
      data.samples.push_back(
          {train.samples[i].image, data.label_map.position(train.samples[i].label), prov});
    }

    TrainedPhase trained = train_phase(std::move(net), nullptr, data, cfg, t);
    traces.push_back(std::move(trained.trace));
    model = std::move(trained.model);
    seen = std::move(now);

    for (std::size_t j = 0; j <= t; ++j) {
      const Dataset& test = tasks.phases[j].test;
      accuracy.set(t, j, eval::accuracy_of(predict_head(*model, seen, test), test));
    }
  }
  return SequenceResult{std::move(*model), PrototypeBuffer{}, std::move(accuracy),
                        std::move(traces), {}, {}};
}

}  // namespace

std::vector<ClassId> predict_head(const nn::Model& model, std::span<const ClassId> classes,
                                  const Dataset& ds) {
  if (model.head_width() != classes.size()) {
    throw ShapeError("predict_head: head width differs from class list");
  }
  const auto features = extract_all(model, ds);
  const std::size_t n = classes.size();
  const auto w = model.head_weight().value.data();
  const auto b = model.head_bias().value.data();
  std::vector<ClassId> out;
  out.reserve(ds.size());
  std::vector<double> logits(n);
  for (const auto& f : features) {
    for (std::size_t c = 0; c < n; ++c) {
      double z = b[c];
      for (std::size_t r = 0; r < f.size(); ++r) z += f[r] * w[r * n + c];
      logits[c] = z;
    }
    const auto best = std::max_element(logits.begin(), logits.end());
    out.push_back(classes[static_cast<std::size_t>(best - logits.begin())]);
  }
  return out;
}

SequenceResult run_lower_bound(const TaskSequence& tasks, const PhaseConfig& cfg,
                               const nn::ExtractorSpec& spec) {
  return run_head_baseline(tasks, cfg, spec, false);
}

SequenceResult run_upper_bound(const TaskSequence& tasks, const PhaseConfig& cfg,
                               const nn::ExtractorSpec& spec) {
  return run_head_baseline(tasks, cfg, spec, true);
}

}  // namespace ir::cil
