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

#include "ir/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "ir/baselines.hpp"
#include "ir/data_io.hpp"
#include "ir/error.hpp"

namespace ir::harness {
namespace {

constexpr std::uint64_t kSplitStream = 11;

/// Runs jobs[i] for every i on up to `threads` workers; rethrows the first
/// failure after all workers stop.
void run_jobs(std::vector<std::function<void()>>& jobs, std::size_t threads) {
  threads = std::max<std::size_t>(1, std::min(threads, jobs.size()));
  if (threads == 1) {
    for (auto& job : jobs) job();
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> workers;
    for (std::size_t w = 0; w < threads; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
          try {
            jobs[i]();
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

RunResult summarize(std::uint64_t seed, std::vector<std::vector<ClassId>> task_classes,
                    cil::SequenceResult&& seq, double seconds) {
  RunResult run;
  run.seed = seed;
  run.task_classes = std::move(task_classes);
  run.accuracy = std::move(seq.accuracy);
  run.ia = eval::average_incremental_accuracy(run.accuracy);
  std::vector<std::size_t> counts;
  for (const auto& c : run.task_classes) counts.push_back(c.size());
  run.ia_class_weighted = eval::class_weighted_incremental_accuracy(run.accuracy, counts);
  run.forgetting = eval::forgetting_series(run.accuracy);
  if (run.accuracy.phases() > 1) run.avg_forgetting = eval::average_forgetting(run.accuracy);
  run.drift = std::move(seq.drift);
  run.traces = std::move(seq.traces);
  run.wall_seconds = seconds;
  return run;
}

}  // namespace

Method parse_method(std::string_view name) {
  if (name == "ir") return Method::kIr;
  if (name == "variant1") return Method::kVariant1;
  if (name == "variant2") return Method::kVariant2;
  if (name == "variant3") return Method::kVariant3;
  if (name == "variant4") return Method::kVariant4;
  if (name == "lower_bound") return Method::kLowerBound;
  if (name == "upper_bound") return Method::kUpperBound;
  throw std::invalid_argument("unknown method '" + std::string(name) +
                              "' (expected ir, variant1..variant4, lower_bound, upper_bound)");
}

std::string to_string(Method method) {
  switch (method) {
    case Method::kIr:
      return "ir";
    case Method::kVariant1:
      return "variant1";
    case Method::kVariant2:
      return "variant2";
    case Method::kVariant3:
      return "variant3";
    case Method::kVariant4:
      return "variant4";
    case Method::kLowerBound:
      return "lower_bound";
    case Method::kUpperBound:
      break;
  }
  return "upper_bound";
}

std::vector<Method> ablation_methods() {
  return {Method::kIr, Method::kVariant1, Method::kVariant2, Method::kVariant3, Method::kVariant4};
}

cil::PhaseConfig method_phase_config(const cil::PhaseConfig& base, Method method) {
  cil::PhaseConfig cfg = base;
  const aug::AugKind aug_on = base.aug == aug::AugKind::kNone ? aug::AugKind::kRotation : base.aug;
  auto flags = [&](bool ce, bool sm, bool with_aug) {
    cfg.enable_ce = ce;
    cfg.enable_sm = sm;
    cfg.aug = with_aug ? aug_on : aug::AugKind::kNone;
  };
  switch (method) {
    case Method::kIr:
      break;
    case Method::kVariant1:
      flags(true, false, false);
      break;
    case Method::kVariant2:
      flags(false, true, false);
      break;
    case Method::kVariant3:
      flags(true, false, true);
      break;
    case Method::kVariant4:
      flags(false, true, true);
      break;
    case Method::kLowerBound:
    case Method::kUpperBound:
      flags(true, false, false);
      break;
  }
  return cfg;
}

std::vector<std::vector<ClassId>> partition_classes(std::span<const ClassId> classes,
                                                    double fraction,
                                                    std::size_t incremental_phases,
                                                    std::uint64_t seed) {
  if (classes.empty()) throw ConfigError("cannot split an empty class set");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("initial fraction must lie in (0, 1]");
  const std::size_t total = classes.size();
  // Guard against 0.1 * 30 = 3.0000000000000004 style ceilings.
  const auto initial = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(total) - 1e-9));
  if (initial == 0 || initial > total) throw ConfigError("initial phase would hold no classes");
  const std::size_t remainder = total - initial;
  if (incremental_phases == 0 ? remainder != 0 : remainder % incremental_phases != 0 ||
                                                     remainder < incremental_phases) {
    std::string valid;
    for (std::size_t p = 1; p <= remainder; ++p) {
      if (remainder % p == 0) valid += (valid.empty() ? "" : ", ") + std::to_string(p);
    }
    throw ConfigError(std::to_string(remainder) + " incremental classes cannot be split into " +
                      std::to_string(incremental_phases) + " equal phases" +
                      (valid.empty() ? std::string(" (use phases = 0)")
                                     : " (valid phase counts: " + valid + ")"));
  }
  std::vector<ClassId> order(classes.begin(), classes.end());
  std::sort(order.begin(), order.end());
  std::mt19937_64 rng(cil::derive_seed(seed, 0, kSplitStream));
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<std::vector<ClassId>> groups;
  groups.emplace_back(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(initial));
  const std::size_t per = incremental_phases == 0 ? 0 : remainder / incremental_phases;
  for (std::size_t p = 0; p < incremental_phases; ++p) {
    const auto start = order.begin() + static_cast<std::ptrdiff_t>(initial + p * per);
    groups.emplace_back(start, start + static_cast<std::ptrdiff_t>(per));
  }
  for (auto& g : groups) std::sort(g.begin(), g.end());
  return groups;
}

cil::TaskSequence split_tasks(const Dataset& train, const Dataset& test, double fraction,
                              std::size_t incremental_phases, std::uint64_t seed) {
  const auto groups = partition_classes(train.classes, fraction, incremental_phases, seed);
  cil::TaskSequence tasks;
  for (const auto& g : groups) tasks.phases.push_back({train.subset(g), test.subset(g)});
  return tasks;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

std::size_t threads_from_env() {
  const char* raw = std::getenv("IR_THREADS");
  if (raw == nullptr) return 1;
  char* end = nullptr;
  const long v = std::strtol(raw, &end, 10);
  if (end == raw || *end != '\0' || v < 1) return 1;
  return static_cast<std::size_t>(v);
}

std::pair<Dataset, Dataset> load_data(const ExperimentConfig& cfg) {
  if (cfg.source == DataSource::kCsv) return load_dataset_csv(cfg.train_csv, cfg.test_csv);
  return gen_synthetic(cfg.synthetic);
}

RunResult run_single(const ExperimentConfig& cfg, Method method, const Dataset& train,
                     const Dataset& test, std::uint64_t seed,
                     std::optional<cil::SequenceResult>* sequence) {
  const auto start = std::chrono::steady_clock::now();
  const auto groups = partition_classes(train.classes, cfg.initial_fraction,
                                        cfg.incremental_phases, seed);
  cil::TaskSequence tasks;
  for (const auto& g : groups) tasks.phases.push_back({train.subset(g), test.subset(g)});

  const Image& probe = train.samples.front().image;
  if (probe.height != probe.width) throw ConfigError("images must be square");
  const nn::ExtractorSpec spec =
      nn::ExtractorSpec::desk_default(probe.channels, probe.height, cfg.embedding_dim);

  cil::PhaseConfig phase_cfg = method_phase_config(cfg.phase, method);
  phase_cfg.rng_seed = seed;
  cil::SequenceResult seq = [&] {
    switch (method) {
      case Method::kLowerBound:
        return cil::run_lower_bound(tasks, phase_cfg, spec);
      case Method::kUpperBound:
        return cil::run_upper_bound(tasks, phase_cfg, spec);
      default:
        return cil::run_sequence(tasks, phase_cfg, spec);
    }
  }();
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (sequence != nullptr) *sequence = seq;
  return summarize(seed, groups, std::move(seq), seconds);
}

Aggregate aggregate_runs(std::span<const RunResult> runs) {
  if (runs.empty()) throw std::invalid_argument("aggregate_runs: no runs");
  const std::size_t phases = runs.front().accuracy.phases();
  Aggregate agg;
  agg.mean_accuracy = eval::AccuracyMatrix(phases);
  for (std::size_t i = 0; i < phases; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double total = 0.0;
      for (const RunResult& r : runs) total += r.accuracy.at(i, j);
      agg.mean_accuracy.set(i, j, std::clamp(total / static_cast<double>(runs.size()), 0.0, 1.0));
    }
  }
  std::vector<double> ia, ia_w, avg_f, drift;
  for (const RunResult& r : runs) {
    ia.push_back(r.ia);
    ia_w.push_back(r.ia_class_weighted);
    if (r.avg_forgetting) avg_f.push_back(*r.avg_forgetting);
    if (!r.drift.empty()) drift.push_back(mean_std(r.drift).mean);
  }
  agg.ia = mean_std(ia);
  agg.ia_class_weighted = mean_std(ia_w);
  if (avg_f.size() == runs.size()) agg.avg_forgetting = mean_std(avg_f);
  if (drift.size() == runs.size()) agg.drift = mean_std(drift).mean;
  agg.forgetting.assign(runs.front().forgetting.size(), 0.0);
  for (const RunResult& r : runs) {
    for (std::size_t i = 0; i < agg.forgetting.size(); ++i) agg.forgetting[i] += r.forgetting[i];
  }
  for (double& f : agg.forgetting) f /= static_cast<double>(runs.size());
  return agg;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, Method method, std::size_t threads) {
  cfg.validate();
  const auto [train, test] = load_data(cfg);
  ExperimentResult result;
  result.method = method;
  result.config = config_echo(cfg);
  result.runs.resize(cfg.seeds.size());
  std::vector<std::function<void()>> jobs;
  for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
    jobs.emplace_back([&, s] { result.runs[s] = run_single(cfg, method, train, test, cfg.seeds[s]); });
  }
  run_jobs(jobs, threads);
  result.aggregate = aggregate_runs(result.runs);
  return result;
}

std::vector<SweepPoint> sweep(const ExperimentConfig& cfg, std::span<const double> tau_grid,
                              std::span<const double> lambda_grid, std::size_t threads) {
  if (tau_grid.empty() || lambda_grid.empty()) throw ConfigError("sweep grids must be non-empty");
  cfg.validate();
  const auto [train, test] = load_data(cfg);
  std::vector<SweepPoint> points;
  std::vector<ExperimentConfig> configs;
  for (double tau : tau_grid) {
    for (double lambda : lambda_grid) {
      ExperimentConfig point = cfg;
      point.phase.tau = tau;
      point.phase.lambda = lambda;
      point.validate();
      configs.push_back(point);
      SweepPoint sp{tau, lambda, {}};
      sp.result.method = Method::kIr;
      sp.result.config = config_echo(point);
      sp.result.runs.resize(cfg.seeds.size());
      points.push_back(std::move(sp));
    }
  }
  std::vector<std::function<void()>> jobs;
  for (std::size_t p = 0; p < points.size(); ++p) {
    for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
      jobs.emplace_back([&, p, s] {
        points[p].result.runs[s] = run_single(configs[p], Method::kIr, train, test, cfg.seeds[s]);
      });
    }
  }
  run_jobs(jobs, threads);
  for (SweepPoint& p : points) p.result.aggregate = aggregate_runs(p.result.runs);
  return points;
}

std::string sweep_csv(std::span<const SweepPoint> points) {
  std::string out = "tau,lambda,ia,ia_std\n";
  for (const SweepPoint& p : points) {
    out += eval::format_double(p.tau) + "," + eval::format_double(p.lambda) + "," +
           eval::format_double(p.result.aggregate.ia.mean) + "," +
           eval::format_double(p.result.aggregate.ia.std) + "\n";
  }
  return out;
}

}  // namespace ir::harness
