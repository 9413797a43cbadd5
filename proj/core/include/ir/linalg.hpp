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
#include <vector>

namespace ir::linalg {

/// Eigen-pairs of a symmetric matrix, eigenvalues in descending order.
/// `vectors` is row-major n x n with eigenvectors stored as columns.
struct SymmetricEigen {
  std::vector<double> values;
  std::vector<double> vectors;
};

inline constexpr int kJacobiMaxSweeps = 100;

/// Cyclic Jacobi eigendecomposition of a row-major n x n symmetric matrix.
/// Throws NumericError when off-diagonal mass has not vanished after
/// `max_sweeps` sweeps.
SymmetricEigen symmetric_eigen(std::vector<double> matrix, std::size_t n,
                               int max_sweeps = kJacobiMaxSweeps);

}  // namespace ir::linalg
