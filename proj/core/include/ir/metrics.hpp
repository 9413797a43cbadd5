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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ir/dataset.hpp"

namespace ir::nn {
class Model;
}
namespace ir::cil {
class PrototypeBuffer;
}

namespace ir::eval {

/// Lower-triangular accuracy table: at(i, j) is the accuracy on task j after
/// training through phase i, defined for i >= j.
class AccuracyMatrix {
 public:
  AccuracyMatrix() = default;
  explicit AccuracyMatrix(std::size_t phases);

  /// Number of phases (T + 1).
  std::size_t phases() const noexcept { return phases_; }
  std::size_t last_phase() const;

  void set(std::size_t i, std::size_t j, double value);
  double at(std::size_t i, std::size_t j) const;
  bool has(std::size_t i, std::size_t j) const;
  /// Every entry with i >= j has been set.
  bool complete() const;

  bool operator==(const AccuracyMatrix&) const = default;

 private:
  std::size_t index(std::size_t i, std::size_t j) const;

  std::size_t phases_ = 0;
  std::vector<std::optional<double>> cells_;
};

/// Fraction of predictions equal to the dataset labels.
double accuracy_of(std::span<const ClassId> predictions, const Dataset& test);

/// 1-NN accuracy over `test`. Throws if a test class has no prototype.
double task_accuracy(const nn::Model& model, const cil::PrototypeBuffer& buffer,
                     const Dataset& test);

/// Mean over phases 0..T of the unweighted per-task row mean.
double average_incremental_accuracy(const AccuracyMatrix& m);

/// As above but each row mean is weighted by the tasks' class counts.
double class_weighted_incremental_accuracy(const AccuracyMatrix& m,
                                           std::span<const std::size_t> task_class_counts);

/// F_i = mean over j < i of max_{j <= k < i} (a[k][j] - a[i][j]).
double forgetting_at(const AccuracyMatrix& m, std::size_t i);

/// F_1 .. F_T.
std::vector<double> forgetting_series(const AccuracyMatrix& m);

/// Mean of F_1 .. F_T; requires T >= 1.
double average_forgetting(const AccuracyMatrix& m);

/// `phase,task_0,...,task_T`, one row per phase, empty cells above the
/// diagonal. Values use the shortest round-trip decimal form.
std::string to_csv(const AccuracyMatrix& m);
AccuracyMatrix accuracy_matrix_from_csv(std::string_view text);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace ir::eval
