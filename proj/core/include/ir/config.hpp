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
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ir/engine.hpp"

namespace ir::harness {

/// One `key = value` line.
struct KeyValue {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// Flat `key = value` text with `#` comments and blank lines. Duplicate keys
/// and lines without `=` are parse errors.
std::vector<KeyValue> parse_key_values(std::string_view text, const std::string& source);

std::string read_text_file(const std::filesystem::path& path);

/// Class templates plus Gaussian pixel noise; see gen_synthetic().
struct SyntheticSpec {
  std::size_t classes = 12;
  std::size_t channels = 1;
  std::size_t image_size = 16;
  std::size_t train_per_class = 200;
  std::size_t test_per_class = 40;
  double template_noise = 1.0;
  double sample_noise = 0.2;
  std::uint64_t seed = 1;

  void validate() const;
};

enum class DataSource { kSynthetic, kCsv };

struct ExperimentConfig {
  DataSource source = DataSource::kSynthetic;
  SyntheticSpec synthetic;
  std::filesystem::path train_csv;
  std::filesystem::path test_csv;
  double initial_fraction = 0.5;
  std::size_t incremental_phases = 3;
  cil::PhaseConfig phase;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::size_t embedding_dim = 32;

  void validate() const;
};

/// Unknown keys are rejected. Relative CSV paths resolve against `base_dir`.
ExperimentConfig parse_experiment_config(std::string_view text, const std::string& source,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

SyntheticSpec parse_synthetic_spec(std::string_view text, const std::string& source);
SyntheticSpec load_synthetic_spec(const std::filesystem::path& path);

/// Canonical key/value listing in a fixed order; parses back to an
/// equivalent config.
std::vector<std::pair<std::string, std::string>> config_echo(const ExperimentConfig& cfg);

std::string to_string(cil::Norm norm);
std::string to_string(aug::AugKind kind);
std::string to_string(nn::InitPolicy policy);

}  // namespace ir::harness
