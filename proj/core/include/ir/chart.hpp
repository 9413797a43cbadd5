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
#include <string>
#include <utility>
#include <vector>

namespace ir::harness {

using Series = std::vector<std::pair<double, double>>;

/// Line chart of forgetting per phase, one polyline per series (keyed by
/// legend label). The plot transform is stored in data-* attributes on the
/// root element so points can be mapped back to pixels.
std::string render_chart_svg(const std::map<std::string, Series>& series,
                             const std::string& x_label = "phase",
                             const std::string& y_label = "forgetting");

void render_chart(const std::map<std::string, Series>& series,
                  const std::filesystem::path& out);

}  // namespace ir::harness
