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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "ir/baselines.hpp"
#include "ir/data_io.hpp"
#include "ir/engine.hpp"
#include "ir/error.hpp"
#include "ir/ops.hpp"

namespace ir::cil {
namespace {

struct Toy {
  Dataset train;
  Dataset test;
};

Toy toy_data(std::size_t classes, std::size_t per_class, std::uint64_t seed = 5) {
  harness::SyntheticSpec s;
  s.classes = classes;
  s.image_size = 8;
  s.train_per_class = per_class;
  s.test_per_class = 4;
  s.sample_noise = 0.1;
  s.seed = seed;
  auto [train, test] = harness::gen_synthetic(s);
  return {std::move(train), std::move(test)};
}

TaskSequence toy_tasks(const Toy& toy, std::vector<std::vector<ClassId>> groups) {
  TaskSequence tasks;
  for (const auto& g : groups) tasks.phases.push_back({toy.train.subset(g), toy.test.subset(g)});
  return tasks;
}

PhaseConfig quick_config() {
  PhaseConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 16;
  cfg.base_lr = 0.01;
  return cfg;
}

const nn::ExtractorSpec kSpec = nn::ExtractorSpec::desk_default(1, 8, 8);

std::vector<std::vector<double>> params_of(const nn::Model& m) {
  std::vector<std::vector<double>> out;
  for (const nn::Parameter* p : m.parameters()) out.emplace_back(p->value.data().begin(), p->value.data().end());
  return out;
}

ad::Tensor batch_of(const Dataset& ds, std::size_t n) {
  std::vector<const Image*> images;
  for (std::size_t i = 0; i < n; ++i) images.push_back(&ds.samples[i].image);
  return stack_images(images);
}

TEST(SpaceMaintenance, ZeroWhenCurrentEqualsFrozen) {
  const Toy toy = toy_data(2, 4);
  const nn::Model m(kSpec, 4, 3);
  const nn::FrozenExtractor frozen(m);
  for (Norm norm : {Norm::kL1, Norm::kL2, Norm::kNuclear}) {
    ad::Tape tape;
    EXPECT_EQ(space_maintenance_loss(tape, m, frozen, batch_of(toy.train, 6), norm).item(), 0.0);
  }
}

TEST(SpaceMaintenance, GradientOnlyReachesCurrent) {
  const Toy toy = toy_data(2, 4);
  nn::Model current(kSpec, 4, 3);
  const nn::Model previous(kSpec, 4, 4);
  const nn::FrozenExtractor frozen(previous);
  ad::Tape tape;
  tape.backward(space_maintenance_loss(tape, current, frozen, batch_of(toy.train, 6), Norm::kL2));
  for (const nn::Parameter& p : frozen.parameters()) EXPECT_FALSE(p.value.has_grad()) << p.name;
  bool any = false;
  for (const nn::Parameter& p : current.extractor()) any = any || p.value.has_grad();
  EXPECT_TRUE(any);
  EXPECT_FALSE(current.head_weight().value.has_grad());
}

TEST(SpaceMaintenance, MatchesHandComposedPenalty) {
  const Toy toy = toy_data(2, 4);
  const nn::Model current(kSpec, 4, 3);
  const nn::Model previous(kSpec, 4, 4);
  const nn::FrozenExtractor frozen(previous);
  const ad::Tensor x = batch_of(toy.train, 6);
  ad::Tape tape(false);
  const ad::Tensor a = nn::forward_features(tape, current, x);
  const ad::Tensor b = nn::forward_features(tape, previous, x);
  const std::size_t d = kSpec.embedding_dim();
  double l1 = 0.0, l2 = 0.0;
  for (std::size_t i = 0; i < 6; ++i) {
    double r1 = 0.0, r2 = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double diff = a[i * d + k] - b[i * d + k];
      r1 += std::abs(diff);
      r2 += diff * diff;
    }
    l1 += r1;
    l2 += std::sqrt(r2);
  }
  EXPECT_NEAR(space_maintenance_loss(tape, current, frozen, x, Norm::kL1).item(), l1 / 6.0, 1e-12);
  EXPECT_NEAR(space_maintenance_loss(tape, current, frozen, x, Norm::kL2).item(), l2 / 6.0, 1e-12);
  EXPECT_NEAR(space_maintenance_loss(tape, current, frozen, x, Norm::kNuclear).item(),
              ad::nuclear_penalty(tape, a, b).item(), 1e-12);
}

TEST(SpaceMaintenance, SpecMismatch) {
  const nn::Model current(kSpec, 4, 3);
  const nn::Model other(nn::ExtractorSpec::desk_default(1, 8, 4), 4, 4);
  const nn::FrozenExtractor frozen(other);
  ad::Tape tape;
  EXPECT_THROW(space_maintenance_loss(tape, current, frozen, ad::Tensor::zeros({1, 1, 8, 8}), Norm::kL2),
               ShapeError);
}

TEST(TrainPhase, LambdaZeroMatchesCeOnlyBitwise) {
  const Toy toy = toy_data(4, 8);
  const auto data = aug::augment_rotation(toy.train.subset(std::vector<ClassId>{2, 3}));
  const nn::Model start(kSpec, data.label_map.augmented_count(), 7);
  const nn::FrozenExtractor frozen(nn::Model(kSpec, 3, 1));
  PhaseConfig zero = quick_config();
  zero.lambda = 0.0;
  PhaseConfig ce_only = quick_config();
  ce_only.enable_sm = false;
  const TrainedPhase a = train_phase(start, &frozen, data, zero, 1);
  const TrainedPhase b = train_phase(start, nullptr, data, ce_only, 1);
  EXPECT_EQ(params_of(a.model), params_of(b.model));
}

TEST(TrainPhase, SmOnlyFromFrozenStaysPut) {
  const Toy toy = toy_data(4, 8);
  const auto data = aug::augment_rotation(toy.train.subset(std::vector<ClassId>{2, 3}));
  const nn::Model start(kSpec, data.label_map.augmented_count(), 7);
  const nn::FrozenExtractor frozen(start);
  PhaseConfig cfg = quick_config();
  cfg.enable_ce = false;
  const TrainedPhase out = train_phase(start, &frozen, data, cfg, 1);
  ASSERT_FALSE(out.trace.batches.empty());
  EXPECT_EQ(out.trace.batches.front().total, 0.0);
  const auto before = params_of(start);
  const auto after = params_of(out.model);
  for (std::size_t i = 0; i < before.size(); ++i)
    for (std::size_t k = 0; k < before[i].size(); ++k) EXPECT_NEAR(after[i][k], before[i][k], 1e-12);
}

TEST(TrainPhase, FirstLossNearUniformBaseline) {
  const Toy toy = toy_data(10, 6);
  for (aug::AugKind kind : {aug::AugKind::kRotation, aug::AugKind::kMixup}) {
    const auto data = aug::augment(toy.train, kind, 3);
    const nn::Model start(kSpec, data.label_map.augmented_count(), 11);
    PhaseConfig cfg = quick_config();
    cfg.epochs = 1;
    const TrainedPhase out = train_phase(start, nullptr, data, cfg, 0);
    const double uniform = std::log(static_cast<double>(data.label_map.augmented_count()));
    EXPECT_NEAR(out.trace.batches.front().ce, uniform, 0.2 * uniform);
    EXPECT_TRUE(std::isfinite(out.trace.epochs.front().total));
  }
}

TEST(TrainPhase, RecordedTotalDecomposes) {
  const Toy toy = toy_data(4, 8);
  const auto data = aug::augment_rotation(toy.train.subset(std::vector<ClassId>{0, 1}));
  const nn::Model start(kSpec, data.label_map.augmented_count(), 7);
  const nn::FrozenExtractor frozen(nn::Model(kSpec, 3, 9));
  for (Norm norm : {Norm::kL1, Norm::kL2, Norm::kNuclear}) {
    PhaseConfig cfg = quick_config();
    cfg.lambda = 2.5;
    cfg.norm = norm;
    const TrainedPhase out = train_phase(start, &frozen, data, cfg, 1);
    for (const BatchRecord& r : out.trace.batches) {
      EXPECT_GT(r.sm, 0.0);
      EXPECT_NEAR(r.total, r.ce + cfg.lambda * r.sm, 1e-10);
    }
    for (const EpochRecord& e : out.trace.epochs) EXPECT_NEAR(e.total, e.ce + cfg.lambda * e.sm, 1e-10);
    EXPECT_EQ(out.trace.epochs.size(), cfg.epochs);
    EXPECT_DOUBLE_EQ(out.trace.epochs[0].lr, cfg.base_lr);
  }
}

TEST(TrainPhase, FlagAndFrozenPreconditions) {
  const Toy toy = toy_data(4, 4);
  const auto data = aug::augment_none(toy.train.subset(std::vector<ClassId>{0, 1}));
  const nn::Model start(kSpec, 2, 7);
  const nn::FrozenExtractor frozen(start);
  PhaseConfig off = quick_config();
  off.enable_ce = false;
  off.enable_sm = false;
  EXPECT_THROW(train_phase(start, nullptr, data, off, 1), ConfigError);
  EXPECT_THROW(train_phase(start, nullptr, data, quick_config(), 1), std::invalid_argument);
  EXPECT_THROW(train_phase(start, &frozen, data, quick_config(), 0), std::invalid_argument);
  // Phase 0 always trains with CE, even when disabled.
  PhaseConfig sm_only = quick_config();
  sm_only.enable_ce = false;
  EXPECT_NO_THROW(train_phase(start, nullptr, data, sm_only, 0));
  EXPECT_THROW(train_phase(nn::Model(kSpec, 5, 1), nullptr, data, quick_config(), 0), ShapeError);
}

TEST(TrainPhase, ConfigValidation) {
  for (auto mutate : std::vector<std::function<void(PhaseConfig&)>>{
           [](PhaseConfig& c) { c.tau = 0; }, [](PhaseConfig& c) { c.lambda = -1; },
           [](PhaseConfig& c) { c.epochs = 0; }, [](PhaseConfig& c) { c.batch_size = 0; }}) {
    PhaseConfig c;
    mutate(c);
    EXPECT_THROW(c.validate(), ConfigError);
  }
}

TEST(Prototypes, MeansOfFeatures) {
  // Flatten + linear(2) with weight 10 * I: features are 10 * pixels.
  const nn::ExtractorSpec flat{1, 1, 2, {{nn::LayerKind::kFlatten, 0}, {nn::LayerKind::kLinearRelu, 2}}};
  nn::Model m(flat, 1, 1);
  m.extractor()[0].value.mutable_data()[0] = 10.0;
  m.extractor()[0].value.mutable_data()[1] = 0.0;
  m.extractor()[0].value.mutable_data()[2] = 0.0;
  m.extractor()[0].value.mutable_data()[3] = 10.0;
  Dataset ds;
  ds.samples.push_back({Image{1, 1, 2, {0.1, 0.3}}, 4});
  ds.samples.push_back({Image{1, 1, 2, {0.3, 0.5}}, 4});
  ds.samples.push_back({Image{1, 1, 2, {0.7, 0.2}}, 9});
  ds.refresh_classes();
  const auto protos = compute_prototypes(m, ds);
  ASSERT_EQ(protos.size(), 2u);
  EXPECT_NEAR(protos.at(4)[0], 2.0, 1e-12);
  EXPECT_NEAR(protos.at(4)[1], 4.0, 1e-12);
  EXPECT_NEAR(protos.at(9)[0], 7.0, 1e-12);
  EXPECT_NEAR(protos.at(9)[1], 2.0, 1e-12);

  Dataset missing = ds;
  missing.classes.push_back(11);
  EXPECT_THROW(compute_prototypes(m, missing), std::invalid_argument);
}

TEST(Prototypes, MatchReExtractedMean) {
  const Toy toy = toy_data(3, 7);
  const nn::Model m(kSpec, 4, 21);
  const auto protos = compute_prototypes(m, toy.train);
  for (ClassId c : toy.train.classes) {
    std::vector<double> mean(kSpec.embedding_dim(), 0.0);
    std::size_t n = 0;
    for (const Sample& s : toy.train.samples) {
      if (s.label != c) continue;
      const Image* ptr = &s.image;
      ad::Tape tape(false);
      const ad::Tensor f = nn::forward_features(tape, m, stack_images({&ptr, 1}));
      for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += f[k];
      ++n;
    }
    for (std::size_t k = 0; k < mean.size(); ++k) EXPECT_NEAR(protos.at(c)[k], mean[k] / n, 1e-12);
  }
}

TEST(PrototypeBuffer, WriteOnce) {
  PrototypeBuffer b;
  b.insert(1, {0.0, 1.0}, 0);
  EXPECT_THROW(b.insert(1, {5.0, 5.0}, 1), std::logic_error);
  EXPECT_THROW(b.insert(2, {5.0}, 1), ShapeError);
  EXPECT_EQ(b.at(1).vector, (std::vector<double>{0.0, 1.0}));
}

TEST(Nearest, HandDistancesAndTies) {
  PrototypeBuffer b;
  b.insert(1, {1.0, 0.0}, 0);
  b.insert(2, {5.0, 5.0}, 0);
  const std::vector<double> origin{0.0, 0.0};
  EXPECT_EQ(nearest_prototype(b, origin), 1);
  const std::vector<double> on2{5.0, 5.0};
  EXPECT_EQ(nearest_prototype(b, on2), 2);
  PrototypeBuffer tie;
  tie.insert(7, {1.0, 0.0}, 0);
  tie.insert(3, {-1.0, 0.0}, 0);
  EXPECT_EQ(nearest_prototype(tie, origin), 3);
  EXPECT_THROW(nearest_prototype(PrototypeBuffer{}, origin), std::invalid_argument);
}

TEST(Nearest, AgreesWithExhaustiveScan) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g(0.0, 1.0);
  PrototypeBuffer b;
  std::vector<std::pair<ClassId, std::vector<double>>> flat;
  for (int c = 0; c < 50; ++c) {
    std::vector<double> v(6);
    for (double& x : v) x = g(rng);
    const ClassId id = 1000 - 17 * c;
    b.insert(id, v, 0);
    flat.emplace_back(id, v);
  }
  for (int q = 0; q < 200; ++q) {
    std::vector<double> f(6);
    for (double& x : f) x = g(rng);
    ClassId best = 0;
    double best_d = 1e300;
    for (const auto& [id, v] : flat) {
      double d = 0.0;
      for (std::size_t k = 0; k < 6; ++k) d += (f[k] - v[k]) * (f[k] - v[k]);
      if (d < best_d || (d == best_d && id < best)) {
        best_d = d;
        best = id;
      }
    }
    EXPECT_EQ(nearest_prototype(b, f), best);
  }
}

TEST(Predict1nn, SampleAtPrototypeGetsItsClass) {
  const Toy toy = toy_data(3, 4);
  const nn::Model m(kSpec, 4, 5);
  const Sample& s = toy.train.samples[2];
  const Image* ptr = &s.image;
  ad::Tape tape(false);
  const ad::Tensor f = nn::forward_features(tape, m, stack_images({&ptr, 1}));
  PrototypeBuffer b;
  b.insert(40, std::vector<double>(f.data().begin(), f.data().end()), 0);
  std::vector<double> far(f.data().begin(), f.data().end());
  for (double& v : far) v += 3.0;
  b.insert(0, far, 0);
  EXPECT_EQ(predict_1nn(b, m, s.image), 40);
  EXPECT_THROW(predict_1nn(PrototypeBuffer{}, m, s.image), std::invalid_argument);
}

TEST(TaskAccuracy, MissingClassAndTally) {
  const Toy toy = toy_data(3, 4);
  const nn::Model m(kSpec, 4, 5);
  PrototypeBuffer b;
  for (auto& [c, v] : compute_prototypes(m, toy.train.subset(std::vector<ClassId>{0, 1}))) b.insert(c, v, 0);
  EXPECT_THROW(eval::task_accuracy(m, b, toy.test), std::invalid_argument);
  const Dataset test01 = toy.test.subset(std::vector<ClassId>{0, 1});
  const auto predictions = predict_1nn(b, m, test01);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test01.size(); ++i) correct += predictions[i] == test01.samples[i].label;
  EXPECT_DOUBLE_EQ(eval::task_accuracy(m, b, test01), static_cast<double>(correct) / test01.size());
}

TEST(TaskSequence, Validation) {
  const Toy toy = toy_data(4, 3);
  EXPECT_NO_THROW(toy_tasks(toy, {{0, 1}, {2, 3}}).validate());
  EXPECT_THROW(toy_tasks(toy, {{0, 1}, {1, 2}}).validate(), std::invalid_argument);
  TaskSequence bad = toy_tasks(toy, {{0, 1}});
  bad.phases[0].test = toy.test.subset(std::vector<ClassId>{2});
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(RunSequence, BufferFreezeKeysAndDeterminism) {
  const Toy toy = toy_data(6, 6);
  const TaskSequence tasks = toy_tasks(toy, {{0, 1, 2}, {3, 4}, {5}});
  PhaseConfig cfg = quick_config();
  cfg.epochs = 2;
  const SequenceResult a = run_sequence(tasks, cfg, kSpec);
  ASSERT_EQ(a.buffer_history.size(), 3u);
  std::vector<ClassId> seen;
  for (std::size_t t = 0; t < 3; ++t) {
    seen.insert(seen.end(), tasks.phases[t].train.classes.begin(), tasks.phases[t].train.classes.end());
    std::vector<ClassId> keys;
    for (const auto& [c, p] : a.buffer_history[t]) keys.push_back(c);
    std::vector<ClassId> sorted = seen;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(keys, sorted);
    for (const auto& [c, p] : a.buffer_history[t]) {
      // Entries from earlier phases are bitwise identical to when stored.
      const Prototype& stored = a.buffer_history[p.phase].at(c);
      EXPECT_EQ(p, stored);
      EXPECT_EQ(p, a.buffer.at(c));
    }
  }
  EXPECT_TRUE(a.accuracy.complete());
  EXPECT_EQ(a.drift.size(), 2u);
  EXPECT_EQ(a.traces.size(), 3u);

  const SequenceResult b = run_sequence(tasks, cfg, kSpec);
  EXPECT_EQ(a.accuracy, b.accuracy);
  EXPECT_EQ(a.buffer, b.buffer);
  EXPECT_EQ(params_of(a.model), params_of(b.model));
  EXPECT_EQ(a.drift, b.drift);
}

TEST(RunSequence, SinglePhase) {
  const Toy toy = toy_data(3, 6);
  const TaskSequence tasks = toy_tasks(toy, {{0, 1, 2}});
  PhaseConfig cfg = quick_config();
  const SequenceResult r = run_sequence(tasks, cfg, kSpec);
  EXPECT_EQ(eval::average_incremental_accuracy(r.accuracy), r.accuracy.at(0, 0));
  EXPECT_TRUE(eval::forgetting_series(r.accuracy).empty());
  EXPECT_TRUE(r.drift.empty());
}

TEST(RunSequence, NoSmNoAugEqualsVariantOneConfiguration) {
  const Toy toy = toy_data(4, 6);
  const TaskSequence tasks = toy_tasks(toy, {{0, 1}, {2, 3}});
  PhaseConfig ir_cfg = quick_config();
  ir_cfg.lambda = 0.0;
  ir_cfg.aug = aug::AugKind::kNone;
  PhaseConfig v1 = quick_config();
  v1.enable_sm = false;
  v1.aug = aug::AugKind::kNone;
  const SequenceResult a = run_sequence(tasks, ir_cfg, kSpec);
  const SequenceResult b = run_sequence(tasks, v1, kSpec);
  EXPECT_EQ(a.accuracy, b.accuracy);
  EXPECT_EQ(a.buffer, b.buffer);
}

TEST(Baselines, HeadGrowsAndEvaluates) {
  const Toy toy = toy_data(4, 6);
  const TaskSequence tasks = toy_tasks(toy, {{0, 1}, {2, 3}});
  const PhaseConfig cfg = quick_config();
  const SequenceResult lower = run_lower_bound(tasks, cfg, kSpec);
  const SequenceResult upper = run_upper_bound(tasks, cfg, kSpec);
  EXPECT_EQ(lower.model.head_width(), 4u);
  EXPECT_EQ(upper.model.head_width(), 4u);
  EXPECT_TRUE(lower.accuracy.complete());
  EXPECT_TRUE(upper.accuracy.complete());
  EXPECT_TRUE(lower.buffer.empty());
  const std::vector<ClassId> classes{0, 1, 2, 3};
  const auto predictions = predict_head(upper.model, classes, tasks.phases[1].test);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) correct += predictions[i] == tasks.phases[1].test.samples[i].label;
  EXPECT_DOUBLE_EQ(upper.accuracy.at(1, 1), static_cast<double>(correct) / predictions.size());
}

}  // namespace
}  // namespace ir::cil
