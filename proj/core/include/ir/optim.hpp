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
#include <span>
#include <vector>

#include "ir/model.hpp"

namespace ir::nn {

/// Moment buffers for Adam. Buffers are sized on the first step and must
/// keep matching the parameter list afterwards.
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
};

/// One bias-corrected Adam update in place. A parameter without an
/// accumulated gradient is treated as having a zero gradient. Throws
/// NumericError naming the parameter if a gradient is not finite.
void adam_step(AdamState& state, std::span<Parameter* const> params, double lr);

/// Milestone schedule: base_lr until ceil(0.45 * total), then x0.1 until
/// ceil(0.9 * total), then x0.01.
double lr_at_epoch(double base_lr, std::size_t epoch, std::size_t total_epochs);

}  // namespace ir::nn
