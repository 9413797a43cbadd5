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
#include <string_view>
#include <utility>
#include <vector>

#include "ir/config.hpp"
#include "ir/engine.hpp"
#include "ir/metrics.hpp"

namespace ir::harness {

/// ir: the configured method as-is. variant1..4 force the ablation flags
/// (CE / SM / AUG): 1 = CE, 2 = SM, 3 = CE+AUG, 4 = SM+AUG. The bounds are
/// softmax-head baselines.
enum class Method { kIr, kVariant1, kVariant2, kVariant3, kVariant4, kLowerBound, kUpperBound };

Method parse_method(std::string_view name);
std::string to_string(Method method);
/// ir followed by the four ablation variants.
std::vector<Method> ablation_methods();

/// Phase-level config a method trains with.
cil::PhaseConfig method_phase_config(const cil::PhaseConfig& base, Method method);

/// Shuffles `classes` by `seed`; the first ceil(fraction * |C|) go to phase
/// 0 and the rest into `incremental_phases` equal groups (each sorted).
std::vector<std::vector<ClassId>> partition_classes(std::span<const ClassId> classes,
                                                    double fraction,
                                                    std::size_t incremental_phases,
                                                    std::uint64_t seed);

cil::TaskSequence split_tasks(const Dataset& train, const Dataset& test, double fraction,
                              std::size_t incremental_phases, std::uint64_t seed);

struct RunResult {
  std::uint64_t seed = 0;
  std::vector<std::vector<ClassId>> task_classes;
  eval::AccuracyMatrix accuracy;
  double ia = 0.0;
  double ia_class_weighted = 0.0;
  std::vector<double> forgetting;         // F_1 .. F_T
  std::optional<double> avg_forgetting;   // absent when T = 0
  std::vector<double> drift;              // per incremental phase
  std::vector<cil::PhaseTrace> traces;
  double wall_seconds = 0.0;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single seed
};

MeanStd mean_std(std::span<const double> values);

struct Aggregate {
  eval::AccuracyMatrix mean_accuracy;
  MeanStd ia;
  MeanStd ia_class_weighted;
  std::optional<MeanStd> avg_forgetting;
  std::vector<double> forgetting;  // seed mean of F_i
  std::optional<double> drift;     // seed mean of the per-run mean drift
};

struct ExperimentResult {
  Method method = Method::kIr;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<RunResult> runs;
  Aggregate aggregate;
};

/// Parallelism cap from IR_THREADS (default 1, invalid values ignored).
std::size_t threads_from_env();

std::pair<Dataset, Dataset> load_data(const ExperimentConfig& cfg);

/// One seed of one method on already loaded data. `sequence`, when given,
/// receives the raw engine output (final model, buffer history).
RunResult run_single(const ExperimentConfig& cfg, Method method, const Dataset& train,
                     const Dataset& test, std::uint64_t seed,
                     std::optional<cil::SequenceResult>* sequence = nullptr);

Aggregate aggregate_runs(std::span<const RunResult> runs);

/// All seeds of `method`, aggregated. Independent seeds run on up to
/// `threads` threads; results keep seed order.
ExperimentResult run_experiment(const ExperimentConfig& cfg, Method method,
                                std::size_t threads = threads_from_env());

struct SweepPoint {
  double tau = 0.0;
  double lambda = 0.0;
  ExperimentResult result;
};

/// Cross product of ir runs, tau-major order.
std::vector<SweepPoint> sweep(const ExperimentConfig& cfg, std::span<const double> tau_grid,
                              std::span<const double> lambda_grid,
                              std::size_t threads = threads_from_env());

/// `tau,lambda,ia,ia_std`, one row per grid point.
std::string sweep_csv(std::span<const SweepPoint> points);

}  // namespace ir::harness
