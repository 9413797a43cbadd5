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

#include "ir/optim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ir/error.hpp"

namespace ir::nn {

void adam_step(AdamState& state, std::span<Parameter* const> params, double lr) {
  if (!(lr > 0.0)) throw std::invalid_argument("adam_step: learning rate must be > 0");
  if (state.first_moment.empty() && state.step == 0) {
    for (const Parameter* p : params) {
      state.first_moment.emplace_back(p->value.numel(), 0.0);
      state.second_moment.emplace_back(p->value.numel(), 0.0);
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw ShapeError("adam_step: optimizer state tracks " +
                     std::to_string(state.first_moment.size()) + " parameters, got " +
                     std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (state.first_moment[i].size() != params[i]->value.numel()) {
      throw ShapeError("adam_step: moment buffer does not match parameter " + params[i]->name);
    }
    for (double g : params[i]->value.grad()) {
      if (!std::isfinite(g)) {
        throw NumericError("adam_step: non-finite gradient in parameter " + params[i]->name);
      }
    }
  }

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto grad = params[i]->value.grad();
    if (grad.empty()) {
      // Zero gradient: moments still decay.
      for (double& m : state.first_moment[i]) m *= state.beta1;
      for (double& v : state.second_moment[i]) v *= state.beta2;
    } else {
      auto& m = state.first_moment[i];
      auto& v = state.second_moment[i];
      for (std::size_t k = 0; k < grad.size(); ++k) {
        m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * grad[k];
        v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * grad[k] * grad[k];
      }
    }
    auto data = params[i]->value.mutable_data();
    const auto& m = state.first_moment[i];
    const auto& v = state.second_moment[i];
    for (std::size_t k = 0; k < data.size(); ++k) {
      const double m_hat = m[k] / correction1;
      const double v_hat = v[k] / correction2;
      data[k] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

double lr_at_epoch(double base_lr, std::size_t epoch, std::size_t total_epochs) {
  if (total_epochs == 0) throw std::invalid_argument("lr_at_epoch: total_epochs must be >= 1");
  // Integer ceilings keep the milestones exact (45 * 100 / 100 == 45).
  const std::size_t first = (45 * total_epochs + 99) / 100;
  const std::size_t second = (90 * total_epochs + 99) / 100;
  if (epoch < first) return base_lr;
  if (epoch < second) return base_lr * 0.1;
  return base_lr * 0.01;
}

}  // namespace ir::nn
