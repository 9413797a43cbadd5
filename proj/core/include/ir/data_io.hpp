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
#include <string>
#include <string_view>
#include <utility>

#include "ir/config.hpp"
#include "ir/dataset.hpp"

namespace ir::harness {

/// One random template per class (pixel = clamp(0.5 + template_noise *
/// (u - 0.5)), u ~ U[0, 1]); every sample is clamp(template + N(0, sigma^2))
/// per pixel. Labels are 0 .. classes - 1. Deterministic per seed.
std::pair<Dataset, Dataset> gen_synthetic(const SyntheticSpec& spec);

/// Text format: header `n,channels,height,width,num_classes`, then one
/// `label,p_1,...,p_{c*h*w}` row per sample. Pixels are written with 17
/// significant digits.
std::string dataset_to_csv(const Dataset& ds);
Dataset dataset_from_csv(std::string_view text, const std::string& source);

void write_dataset_csv(const Dataset& ds, const std::filesystem::path& path);
Dataset read_dataset_csv(const std::filesystem::path& path);

std::pair<Dataset, Dataset> load_dataset_csv(const std::filesystem::path& train_path,
                                             const std::filesystem::path& test_path);

void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace ir::harness
