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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ir/augment.hpp"
#include "ir/dataset.hpp"
#include "ir/metrics.hpp"
#include "ir/model.hpp"
#include "ir/prototypes.hpp"

namespace ir::cil {

enum class Norm { kL1, kL2, kNuclear };

struct PhaseConfig {
  double tau = 4.0;
  double lambda = 1.0;
  Norm norm = Norm::kL2;
  std::size_t epochs = 30;
  std::size_t batch_size = 64;
  double base_lr = 1e-3;
  aug::AugKind aug = aug::AugKind::kRotation;
  nn::InitPolicy theta_init = nn::InitPolicy::kWarm;
  bool enable_ce = true;
  bool enable_sm = true;
  std::uint64_t rng_seed = 0;

  /// Throws ConfigError unless tau > 0, lambda >= 0, epochs and batch >= 1.
  void validate() const;
};

struct Phase {
  Dataset train;
  Dataset test;
};

/// Phase 0 is the initial phase; class sets must be pairwise disjoint.
struct TaskSequence {
  std::vector<Phase> phases;

  void validate() const;
  std::size_t last_phase() const { return phases.size() - 1; }
};

struct BatchRecord {
  double total = 0.0;
  double ce = 0.0;
  double sm = 0.0;
};

struct EpochRecord {
  double lr = 0.0;
  double total = 0.0;
  double ce = 0.0;
  double sm = 0.0;
};

struct PhaseTrace {
  std::vector<BatchRecord> batches;
  std::vector<EpochRecord> epochs;  // batch-count weighted means
};

/// Deterministic per-purpose seed derivation (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t phase, std::uint64_t stream);

/// L1 / L2 per-row penalty or batch nuclear penalty between feature sets.
ad::Tensor feature_penalty(ad::Tape& tape, const ad::Tensor& current,
                           const ad::Tensor& frozen, Norm norm);

/// Penalty between the current and frozen extractors' features on `batch`.
/// Only the current model's parameters receive gradient.
ad::Tensor space_maintenance_loss(ad::Tape& tape, const nn::Model& current,
                                  const nn::FrozenExtractor& frozen, const ad::Tensor& batch,
                                  Norm norm);

struct TrainedPhase {
  nn::Model model;
  PhaseTrace trace;
};

/// Trains one phase on the augmented set. CE is always on at phase 0; the
/// space maintenance term is on for phase > 0 when enabled, and then
/// `frozen` must be given.
TrainedPhase train_phase(nn::Model model, const nn::FrozenExtractor* frozen,
                         const aug::AugmentedDataset& data, const PhaseConfig& cfg,
                         std::size_t phase);

/// Features of every sample, computed in chunks without recording.
std::vector<std::vector<double>> extract_all(const nn::Model& model, const Dataset& ds);

/// Mean feature per class over an unaugmented dataset.
std::map<ClassId, std::vector<double>> compute_prototypes(const nn::Model& model,
                                                          const Dataset& ds);

ClassId predict_1nn(const PrototypeBuffer& buffer, const nn::Model& model, const Image& sample);
std::vector<ClassId> predict_1nn(const PrototypeBuffer& buffer, const nn::Model& model,
                                 const Dataset& ds);

/// Mean over samples of ||F_current(x) - F_frozen(x)||_2.
double feature_drift(const nn::Model& current, const nn::FrozenExtractor& previous,
                     const Dataset& ds);

struct SequenceResult {
  nn::Model model;
  PrototypeBuffer buffer;
  eval::AccuracyMatrix accuracy;
  std::vector<PhaseTrace> traces;
  /// drift[t - 1]: feature drift between phases t - 1 and t on phase-0 test data.
  std::vector<double> drift;
  /// Buffer contents after each phase.
  std::vector<PrototypeBuffer> buffer_history;
};

/// The full incremental run: augment, train, store prototypes, evaluate
/// every seen task with the 1-NN classifier after each phase.
SequenceResult run_sequence(const TaskSequence& tasks, const PhaseConfig& cfg,
                            const nn::ExtractorSpec& spec);

}  // namespace ir::cil
