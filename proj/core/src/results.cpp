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

#include "ir/results.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "ir/data_io.hpp"
#include "ir/error.hpp"

namespace ir::harness {
namespace {

using nlohmann::ordered_json;

ordered_json matrix_json(const eval::AccuracyMatrix& m) {
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < m.phases(); ++i) {
    ordered_json row = ordered_json::array();
    for (std::size_t j = 0; j <= i; ++j) row.push_back(m.at(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json mean_std_json(const MeanStd& v) {
  ordered_json o;
  o["mean"] = v.mean;
  o["std"] = v.std;
  return o;
}

void write_run_files(const RunResult& run, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text_file(dir / "result.json", to_json(run).dump(2) + "\n");
  write_text_file(dir / "accuracy_matrix.csv", eval::to_csv(run.accuracy));
  write_text_file(dir / "forgetting.csv", forgetting_csv(run.forgetting));
}

}  // namespace

ordered_json to_json(const RunResult& run) {
  ordered_json o;
  o["seed"] = run.seed;
  o["task_classes"] = run.task_classes;
  o["accuracy_matrix"] = matrix_json(run.accuracy);
  o["ia"] = run.ia;
  o["ia_class_weighted"] = run.ia_class_weighted;
  o["forgetting"] = run.forgetting;
  o["avg_forgetting"] = run.avg_forgetting ? ordered_json(*run.avg_forgetting) : ordered_json();
  o["drift"] = run.drift;
  ordered_json traces = ordered_json::array();
  for (std::size_t t = 0; t < run.traces.size(); ++t) {
    ordered_json epochs = ordered_json::array();
    for (const cil::EpochRecord& e : run.traces[t].epochs) {
      epochs.push_back({{"lr", e.lr}, {"total", e.total}, {"ce", e.ce}, {"sm", e.sm}});
    }
    traces.push_back({{"phase", t}, {"epochs", std::move(epochs)}});
  }
  o["loss_trace"] = std::move(traces);
  return o;
}

ordered_json to_json(const ExperimentResult& result) {
  ordered_json o;
  o["method"] = to_string(result.method);
  ordered_json config = ordered_json::object();
  for (const auto& [k, v] : result.config) config[k] = v;
  o["config"] = std::move(config);

  const Aggregate& agg = result.aggregate;
  ordered_json a;
  a["seeds"] = result.runs.size();
  a["ia"] = mean_std_json(agg.ia);
  a["ia_class_weighted"] = mean_std_json(agg.ia_class_weighted);
  a["avg_forgetting"] = agg.avg_forgetting ? mean_std_json(*agg.avg_forgetting) : ordered_json();
  a["forgetting"] = agg.forgetting;
  a["drift"] = agg.drift ? ordered_json(*agg.drift) : ordered_json();
  a["accuracy_matrix"] = matrix_json(agg.mean_accuracy);
  o["aggregate"] = std::move(a);

  ordered_json runs = ordered_json::array();
  for (const RunResult& r : result.runs) runs.push_back(to_json(r));
  o["runs"] = std::move(runs);
  return o;
}

std::string forgetting_csv(std::span<const double> series) {
  std::string out = "phase,forgetting\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    out += std::to_string(i + 1) + "," + eval::format_double(series[i]) + "\n";
  }
  return out;
}

std::vector<std::pair<double, double>> parse_forgetting_csv(std::string_view text,
                                                            const std::string& source) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line) || line != "phase,forgetting") {
    throw ParseError(source, 1, "expected header 'phase,forgetting'");
  }
  ++lineno;
  std::vector<std::pair<double, double>> points;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(source, lineno, "expected two fields");
    double x = 0.0;
    double y = 0.0;
    const char* b = line.data();
    const char* e = b + line.size();
    auto rx = std::from_chars(b, b + comma, x);
    auto ry = std::from_chars(b + comma + 1, e, y);
    if (rx.ec != std::errc() || rx.ptr != b + comma || ry.ec != std::errc() || ry.ptr != e) {
      throw ParseError(source, lineno, "malformed number");
    }
    points.emplace_back(x, y);
  }
  return points;
}

void emit_results(const ExperimentResult& result, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());
  write_text_file(out_dir / "result.json", to_json(result).dump(2) + "\n");
  write_text_file(out_dir / "accuracy_matrix.csv", eval::to_csv(result.aggregate.mean_accuracy));
  write_text_file(out_dir / "forgetting.csv", forgetting_csv(result.aggregate.forgetting));

  ordered_json timing;
  double total = 0.0;
  ordered_json per_seed = ordered_json::array();
  for (const RunResult& r : result.runs) {
    per_seed.push_back({{"seed", r.seed}, {"wall_seconds", r.wall_seconds}});
    total += r.wall_seconds;
  }
  timing["runs"] = std::move(per_seed);
  timing["total_seconds"] = total;
  write_text_file(out_dir / "timing.json", timing.dump(2) + "\n");

  for (const RunResult& r : result.runs) {
    write_run_files(r, out_dir / ("seed_" + std::to_string(r.seed)));
  }
}

std::pair<std::string, std::vector<std::pair<double, double>>> load_forgetting_series(
    const std::filesystem::path& dir) {
  const auto result_path = dir / "result.json";
  ordered_json doc;
  try {
    doc = ordered_json::parse(read_text_file(result_path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(result_path.string() + ": " + e.what());
  }
  if (!doc.contains("method") || !doc["method"].is_string()) {
    throw ParseError(result_path.string() + ": missing string field 'method'");
  }
  const auto csv_path = dir / "forgetting.csv";
  return {doc["method"].get<std::string>(),
          parse_forgetting_csv(read_text_file(csv_path), csv_path.string())};
}

}  // namespace ir::harness
