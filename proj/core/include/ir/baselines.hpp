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

#include "ir/engine.hpp"

/// Softmax-head baselines that bracket the incremental method.
namespace ir::cil {

/// Sequential CE fine-tuning on each phase's data alone with a head that
/// grows to cover every class seen so far; evaluated by that head.
SequenceResult run_lower_bound(const TaskSequence& tasks, const PhaseConfig& cfg,
                               const nn::ExtractorSpec& spec);

/// Joint CE training on the union of all data seen so far at every phase;
/// evaluated by the head.
SequenceResult run_upper_bound(const TaskSequence& tasks, const PhaseConfig& cfg,
                               const nn::ExtractorSpec& spec);

/// Argmax of the head over `classes` (sorted; head column i is classes[i]).
std::vector<ClassId> predict_head(const nn::Model& model, std::span<const ClassId> classes,
                                  const Dataset& ds);

}  // namespace ir::cil
