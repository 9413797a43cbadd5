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

#include "ir/tensor.hpp"

/// Differentiable primitives. Every function records its backward rule on
/// the tape when any operand requires a gradient.
namespace ir::ad {

enum class Padding { kSame, kNone };

Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor scale(Tape& tape, const Tensor& a, double factor);
Tensor relu(Tape& tape, const Tensor& a);

/// Sum of all entries as a [1] tensor.
Tensor sum(Tape& tape, const Tensor& a);

/// Same data viewed under a new shape with equal element count.
Tensor reshape(Tape& tape, const Tensor& a, Shape shape);

/// [m x k] . [k x n] -> [m x n].
Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);

/// Adds a length-n bias to every row of an [m x n] tensor.
Tensor add_row_bias(Tape& tape, const Tensor& a, const Tensor& bias);

/// Stride-1 3x3 convolution. input [batch x ch x h x w], kernels
/// [out x ch x 3 x 3], optional bias [out].
Tensor conv2d(Tape& tape, const Tensor& input, const Tensor& kernels,
              const Tensor& bias = Tensor(), Padding padding = Padding::kSame);

/// 2x2 max pooling with stride 2. Gradient goes to the first row-major
/// maximum of each window.
Tensor maxpool2d(Tape& tape, const Tensor& input);

/// Row-wise softmax of logits / tau, stabilised by max subtraction.
Tensor softmax_with_temperature(Tape& tape, const Tensor& logits, double tau);

inline constexpr double kLogProbabilityFloor = 1e-12;

/// -(1/batch) * sum_i log p[i, label_i], with p clamped below at 1e-12.
Tensor cross_entropy(Tape& tape, const Tensor& probabilities,
                     std::span<const std::size_t> labels);

/// (1/batch) * sum_i ||a_i - b_i||_p for p in {1, 2}. The p = 2 norm is the
/// plain Euclidean norm; its subgradient at a zero row is zero.
Tensor vector_lp_penalty(Tape& tape, const Tensor& a, const Tensor& b, int p);

inline constexpr double kSingularValueCutoff = 1e-10;

/// (1/batch) * nuclear norm of (a - b) for [batch x d] inputs.
Tensor nuclear_penalty(Tape& tape, const Tensor& a, const Tensor& b);

}  // namespace ir::ad
