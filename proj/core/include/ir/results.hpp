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

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ir/experiment.hpp"

namespace ir::harness {

/// Everything but wall-clock time, so repeated runs serialize identically.
nlohmann::ordered_json to_json(const RunResult& run);
nlohmann::ordered_json to_json(const ExperimentResult& result);

/// `phase,forgetting` rows for phases 1..T.
std::string forgetting_csv(std::span<const double> series);
/// Inverse of forgetting_csv; returns (phase, value) points.
std::vector<std::pair<double, double>> parse_forgetting_csv(std::string_view text,
                                                            const std::string& source);

/// Writes result.json, accuracy_matrix.csv, forgetting.csv and timing.json
/// into `out_dir`, plus the same files (without timing) under seed_<s>/.
void emit_results(const ExperimentResult& result, const std::filesystem::path& out_dir);

/// Reads the method name and mean forgetting series back from an output
/// directory written by emit_results.
std::pair<std::string, std::vector<std::pair<double, double>>> load_forgetting_series(
    const std::filesystem::path& dir);

}  // namespace ir::harness
