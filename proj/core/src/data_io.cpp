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

#include "ir/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "ir/error.hpp"

namespace ir::harness {

std::pair<Dataset, Dataset> gen_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const std::size_t pixels = spec.channels * spec.image_size * spec.image_size;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto clamp01 = [](double v) { return std::clamp(v, 0.0, 1.0); };

  std::vector<std::vector<double>> templates(spec.classes, std::vector<double>(pixels));
  for (auto& t : templates) {
    for (double& p : t) p = clamp01(0.5 + spec.template_noise * (unit(rng) - 0.5));
  }

  std::normal_distribution<double> noise(0.0, 1.0);
  auto draw = [&](std::size_t per_class) {
    Dataset ds;
    for (std::size_t c = 0; c < spec.classes; ++c) {
      for (std::size_t i = 0; i < per_class; ++i) {
        Image img{spec.channels, spec.image_size, spec.image_size, templates[c]};
        if (spec.sample_noise > 0.0) {
          for (double& p : img.pixels) p = clamp01(p + spec.sample_noise * noise(rng));
        }
        ds.samples.push_back({std::move(img), static_cast<ClassId>(c)});
      }
    }
    ds.refresh_classes();
    return ds;
  };
  Dataset train = draw(spec.train_per_class);
  Dataset test = draw(spec.test_per_class);
  return {std::move(train), std::move(test)};
}

std::string dataset_to_csv(const Dataset& ds) {
  if (ds.empty()) throw std::invalid_argument("cannot write an empty dataset");
  const Image& first = ds.samples.front().image;
  ClassId max_label = 0;
  for (const Sample& s : ds.samples) max_label = std::max(max_label, s.label);
  std::string out;
  out += std::to_string(ds.size()) + "," + std::to_string(first.channels) + "," +
         std::to_string(first.height) + "," + std::to_string(first.width) + "," +
         std::to_string(max_label + 1) + "\n";
  char buf[40];
  for (const Sample& s : ds.samples) {
    out += std::to_string(s.label);
    for (double p : s.image.pixels) {
      const int len = std::snprintf(buf, sizeof(buf), ",%.17g", p);
      out.append(buf, static_cast<std::size_t>(len));
    }
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& value) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace

Dataset dataset_from_csv(std::string_view text, const std::string& source) {
  std::vector<std::string_view> lines;
  {
    std::size_t start = 0;
    while (start < text.size()) {
      auto nl = text.find('\n', start);
      if (nl == std::string_view::npos) nl = text.size();
      lines.push_back(text.substr(start, nl - start));
      start = nl + 1;
    }
  }
  while (!lines.empty() && (lines.back().empty() || lines.back() == "\r")) lines.pop_back();
  if (lines.empty()) throw ParseError(source, 1, "missing header");

  const auto header = split_commas(lines[0]);
  std::size_t dims[5] = {};
  if (header.size() != 5) {
    throw ParseError(source, 1, "header must be n,channels,height,width,num_classes");
  }
  for (std::size_t i = 0; i < 5; ++i) {
    if (!parse_number(header[i], dims[i])) {
      throw ParseError(source, 1, "header field '" + std::string(header[i]) + "' is not an integer");
    }
  }
  const auto [n, ch, h, w, num_classes] = dims;
  if (ch == 0 || h == 0 || w == 0 || num_classes == 0) {
    throw ParseError(source, 1, "header dimensions must be positive");
  }
  if (lines.size() - 1 != n) {
    throw ParseError(source, lines.size(), "header declares " + std::to_string(n) +
                                               " samples, file has " +
                                               std::to_string(lines.size() - 1));
  }
  const std::size_t pixels = ch * h * w;
  Dataset ds;
  ds.samples.reserve(n);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split_commas(lines[r]);
    if (cells.size() != pixels + 1) {
      throw ParseError(source, r + 1, "expected " + std::to_string(pixels + 1) + " fields, got " +
                                          std::to_string(cells.size()));
    }
    long long label = 0;
    if (!parse_number(cells[0], label)) {
      throw ParseError(source, r + 1, "label '" + std::string(cells[0]) + "' is not an integer");
    }
    if (label < 0 || static_cast<std::size_t>(label) >= num_classes) {
      throw ParseError(source, r + 1, "label " + std::to_string(label) + " outside [0, " +
                                          std::to_string(num_classes) + ")");
    }
    Image img{ch, h, w, std::vector<double>(pixels)};
    for (std::size_t p = 0; p < pixels; ++p) {
      double v = 0.0;
      if (!parse_number(cells[p + 1], v)) {
        throw ParseError(source, r + 1, "pixel '" + std::string(cells[p + 1]) + "' is not a number");
      }
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ParseError(source, r + 1, "pixel value " + std::string(cells[p + 1]) +
                                            " outside [0, 1]");
      }
      img.pixels[p] = v;
    }
    ds.samples.push_back({std::move(img), static_cast<ClassId>(label)});
  }
  ds.refresh_classes();
  return ds;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_dataset_csv(const Dataset& ds, const std::filesystem::path& path) {
  write_text_file(path, dataset_to_csv(ds));
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  return dataset_from_csv(read_text_file(path), path.string());
}

std::pair<Dataset, Dataset> load_dataset_csv(const std::filesystem::path& train_path,
                                             const std::filesystem::path& test_path) {
  return {read_dataset_csv(train_path), read_dataset_csv(test_path)};
}

}  // namespace ir::harness
