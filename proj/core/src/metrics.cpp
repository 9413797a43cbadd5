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

#include "ir/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ir/engine.hpp"
#include "ir/error.hpp"
#include "ir/prototypes.hpp"

namespace ir::eval {

AccuracyMatrix::AccuracyMatrix(std::size_t phases)
    : phases_(phases), cells_(phases * (phases + 1) / 2) {
  if (phases == 0) throw std::invalid_argument("AccuracyMatrix needs at least one phase");
}

std::size_t AccuracyMatrix::last_phase() const {
  if (phases_ == 0) throw std::logic_error("empty accuracy matrix");
  return phases_ - 1;
}

std::size_t AccuracyMatrix::index(std::size_t i, std::size_t j) const {
  if (i >= phases_ || j > i) {
    throw std::out_of_range("accuracy cell (" + std::to_string(i) + ", " + std::to_string(j) +
                            ") outside the lower triangle of " + std::to_string(phases_) +
                            " phases");
  }
  return i * (i + 1) / 2 + j;
}

void AccuracyMatrix::set(std::size_t i, std::size_t j, double value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::invalid_argument("accuracy must lie in [0, 1], got " + format_double(value));
  }
  cells_[index(i, j)] = value;
}

double AccuracyMatrix::at(std::size_t i, std::size_t j) const {
  const auto& cell = cells_[index(i, j)];
  if (!cell) {
    throw std::logic_error("accuracy cell (" + std::to_string(i) + ", " + std::to_string(j) +
                           ") not filled");
  }
  return *cell;
}

bool AccuracyMatrix::has(std::size_t i, std::size_t j) const {
  return i < phases_ && j <= i && cells_[index(i, j)].has_value();
}

bool AccuracyMatrix::complete() const {
  return phases_ > 0 &&
         std::all_of(cells_.begin(), cells_.end(), [](const auto& c) { return c.has_value(); });
}

double accuracy_of(std::span<const ClassId> predictions, const Dataset& test) {
  if (predictions.size() != test.size()) {
    throw std::invalid_argument("accuracy_of: prediction count differs from test size");
  }
  if (test.empty()) throw std::invalid_argument("accuracy_of: empty test set");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == test.samples[i].label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

double task_accuracy(const nn::Model& model, const cil::PrototypeBuffer& buffer,
                     const Dataset& test) {
  for (ClassId c : test.classes) {
    if (!buffer.contains(c)) {
      throw std::invalid_argument("task_accuracy: class " + std::to_string(c) +
                                  " has no prototype");
    }
  }
  return accuracy_of(cil::predict_1nn(buffer, model, test), test);
}

namespace {

void require_complete(const AccuracyMatrix& m, const char* what) {
  if (!m.complete()) throw std::invalid_argument(std::string(what) + ": incomplete accuracy matrix");
}

}  // namespace

double average_incremental_accuracy(const AccuracyMatrix& m) {
  require_complete(m, "average_incremental_accuracy");
  double total = 0.0;
  for (std::size_t i = 0; i < m.phases(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j <= i; ++j) row += m.at(i, j);
    total += row / static_cast<double>(i + 1);
  }
  return total / static_cast<double>(m.phases());
}

double class_weighted_incremental_accuracy(const AccuracyMatrix& m,
                                           std::span<const std::size_t> task_class_counts) {
  require_complete(m, "class_weighted_incremental_accuracy");
  if (task_class_counts.size() != m.phases()) {
    throw std::invalid_argument("class_weighted_incremental_accuracy: need one class count per task");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < m.phases(); ++i) {
    double row = 0.0, weight = 0.0;
    for (std::size_t j = 0; j <= i; ++j) {
      const double w = static_cast<double>(task_class_counts[j]);
      row += w * m.at(i, j);
      weight += w;
    }
    if (weight <= 0.0) throw std::invalid_argument("class counts must be positive");
    total += row / weight;
  }
  return total / static_cast<double>(m.phases());
}

double forgetting_at(const AccuracyMatrix& m, std::size_t i) {
  if (i == 0) throw std::invalid_argument("forgetting is undefined at phase 0");
  if (i >= m.phases()) throw std::out_of_range("forgetting_at: phase beyond the matrix");
  double total = 0.0;
  for (std::size_t j = 0; j < i; ++j) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = j; k < i; ++k) worst = std::max(worst, m.at(k, j) - m.at(i, j));
    total += worst;
  }
  return total / static_cast<double>(i);
}

std::vector<double> forgetting_series(const AccuracyMatrix& m) {
  std::vector<double> out;
  for (std::size_t i = 1; i < m.phases(); ++i) out.push_back(forgetting_at(m, i));
  return out;
}

double average_forgetting(const AccuracyMatrix& m) {
  if (m.phases() < 2) throw std::invalid_argument("average forgetting needs at least one incremental phase");
  const std::vector<double> series = forgetting_series(m);
  double total = 0.0;
  for (double f : series) total += f;
  return total / static_cast<double>(series.size());
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string to_csv(const AccuracyMatrix& m) {
  std::ostringstream out;
  out << "phase";
  for (std::size_t j = 0; j < m.phases(); ++j) out << ",task_" << j;
  out << '\n';
  for (std::size_t i = 0; i < m.phases(); ++i) {
    out << i;
    for (std::size_t j = 0; j < m.phases(); ++j) {
      out << ',';
      if (m.has(i, j)) out << format_double(m.at(i, j));
    }
    out << '\n';
  }
  return out.str();
}

AccuracyMatrix accuracy_matrix_from_csv(std::string_view text) {
  std::vector<std::string> lines;
  {
    std::string line;
    std::istringstream in{std::string(text)};
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) lines.push_back(line);
    }
  }
  if (lines.empty()) throw ParseError("accuracy matrix csv is empty");
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };
  const auto header = split(lines[0]);
  if (header.empty() || header[0] != "phase") throw ParseError("accuracy csv", 1, "bad header");
  const std::size_t phases = header.size() - 1;
  if (lines.size() != phases + 1) throw ParseError("accuracy csv", lines.size(), "row count mismatch");
  AccuracyMatrix m(phases);
  for (std::size_t i = 0; i < phases; ++i) {
    const auto cells = split(lines[i + 1]);
    if (cells.size() != phases + 1) throw ParseError("accuracy csv", i + 2, "wrong cell count");
    for (std::size_t j = 0; j <= i; ++j) {
      const std::string& c = cells[j + 1];
      double v = 0.0;
      const auto res = std::from_chars(c.data(), c.data() + c.size(), v);
      if (res.ec != std::errc() || res.ptr != c.data() + c.size()) {
        throw ParseError("accuracy csv", i + 2, "bad number '" + c + "'");
      }
      m.set(i, j, v);
    }
  }
  return m;
}

}  // namespace ir::eval
