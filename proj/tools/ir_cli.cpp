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

// Command line front end: gen-data, run, ablate, sweep, plot.

#include <charconv>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ir/chart.hpp"
#include "ir/config.hpp"
#include "ir/data_io.hpp"
#include "ir/error.hpp"
#include "ir/experiment.hpp"
#include "ir/results.hpp"

namespace fs = std::filesystem;
using namespace ir;
using namespace ir::harness;

namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

/// Thrown for problems with the invocation itself (bad config, bad lists).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_grid(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    std::string item = text.substr(start, end - start);
    while (!item.empty() && item.front() == ' ') item.erase(item.begin());
    while (!item.empty() && item.back() == ' ') item.pop_back();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      throw UsageError(std::string(flag) + ": cannot parse '" + item + "' as a number");
    }
    out.push_back(v);
    start = end + 1;
  }
  return out;
}

ExperimentConfig load_config(const fs::path& path) {
  try {
    ExperimentConfig cfg = load_experiment_config(path);
    cfg.validate();
    return cfg;
  } catch (const ParseError& e) {
    throw UsageError(e.what());
  } catch (const ConfigError& e) {
    throw UsageError(path.string() + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw UsageError(e.what());
  }
}

Method load_method(const std::string& name) {
  try {
    return parse_method(name);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

void print_summary(const ExperimentResult& r) {
  const Aggregate& a = r.aggregate;
  std::printf("%-12s IA %.4f +- %.4f", to_string(r.method).c_str(), a.ia.mean, a.ia.std);
  if (a.avg_forgetting) {
    std::printf("  Avg.F %.4f +- %.4f", a.avg_forgetting->mean, a.avg_forgetting->std);
  }
  std::printf("\n");
}

int cmd_gen_data(const fs::path& spec_path, const fs::path& out) {
  SyntheticSpec spec;
  try {
    spec = load_synthetic_spec(spec_path);
    spec.validate();
  } catch (const ParseError& e) {
    throw UsageError(e.what());
  } catch (const ConfigError& e) {
    throw UsageError(spec_path.string() + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw UsageError(e.what());
  }
  const auto [train, test] = gen_synthetic(spec);
  fs::create_directories(out);
  write_dataset_csv(train, out / "train.csv");
  write_dataset_csv(test, out / "test.csv");
  std::printf("wrote %zu train and %zu test samples to %s\n", train.samples.size(),
              test.samples.size(), out.string().c_str());
  return 0;
}

int cmd_run(const fs::path& config, const std::string& method_name, const fs::path& out) {
  const ExperimentConfig cfg = load_config(config);
  const Method method = load_method(method_name);
  const ExperimentResult result = run_experiment(cfg, method);
  emit_results(result, out);
  print_summary(result);
  return 0;
}

int cmd_ablate(const fs::path& config, const fs::path& out) {
  const ExperimentConfig cfg = load_config(config);
  std::string summary = "method,ia,ia_std,avg_forgetting,avg_forgetting_std\n";
  std::map<std::string, Series> chart;
  for (Method m : ablation_methods()) {
    const ExperimentResult result = run_experiment(cfg, m);
    const std::string name = to_string(m);
    emit_results(result, out / name);
    print_summary(result);
    const Aggregate& a = result.aggregate;
    summary += name + "," + eval::format_double(a.ia.mean) + "," + eval::format_double(a.ia.std) +
               "," + (a.avg_forgetting ? eval::format_double(a.avg_forgetting->mean) : "") + "," +
               (a.avg_forgetting ? eval::format_double(a.avg_forgetting->std) : "") + "\n";
    Series s;
    for (std::size_t i = 0; i < a.forgetting.size(); ++i) {
      s.emplace_back(static_cast<double>(i + 1), a.forgetting[i]);
    }
    if (!s.empty()) chart[name] = std::move(s);
  }
  write_text_file(out / "summary.csv", summary);
  if (!chart.empty()) render_chart(chart, out / "forgetting.svg");
  return 0;
}

int cmd_sweep(const fs::path& config, const std::string& taus, const std::string& lambdas,
              const fs::path& out) {
  const ExperimentConfig cfg = load_config(config);
  const auto tau_grid = parse_grid(taus, "--tau");
  const auto lambda_grid = parse_grid(lambdas, "--lambda");
  const auto points = sweep(cfg, tau_grid, lambda_grid);
  fs::create_directories(out);
  for (const SweepPoint& p : points) {
    emit_results(p.result, out / ("tau_" + eval::format_double(p.tau) + "_lambda_" +
                                  eval::format_double(p.lambda)));
  }
  write_text_file(out / "sweep.csv", sweep_csv(points));
  std::fputs(sweep_csv(points).c_str(), stdout);
  return 0;
}

int cmd_plot(const std::vector<std::string>& dirs, const fs::path& out) {
  std::map<std::string, Series> chart;
  for (const std::string& d : dirs) {
    auto [label, series] = load_forgetting_series(d);
    if (chart.contains(label)) label += " (" + fs::path(d).filename().string() + ")";
    chart[label] = std::move(series);
  }
  render_chart(chart, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exemplar-free class-incremental learning experiments"};
  app.require_subcommand(1);

  fs::path spec_path, config, out;
  std::string method = "ir", taus, lambdas;
  std::vector<std::string> in_dirs;

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset as CSV");
  gen->add_option("--spec", spec_path, "Synthetic spec file")->required();
  gen->add_option("--out", out, "Output directory")->required();

  auto* run = app.add_subcommand("run", "Run one method over all configured seeds");
  run->add_option("--config", config, "Experiment config file")->required();
  run->add_option("--method", method, "ir, variant1..variant4, lower_bound, upper_bound");
  run->add_option("--out", out, "Output directory")->required();

  auto* ablate = app.add_subcommand("ablate", "Run ir and the four ablation variants");
  ablate->add_option("--config", config, "Experiment config file")->required();
  ablate->add_option("--out", out, "Output directory")->required();

  auto* sw = app.add_subcommand("sweep", "Grid over tau and lambda");
  sw->add_option("--config", config, "Experiment config file")->required();
  sw->add_option("--tau", taus, "Comma separated tau values")->required();
  sw->add_option("--lambda", lambdas, "Comma separated lambda values")->required();
  sw->add_option("--out", out, "Output directory")->required();

  auto* plot = app.add_subcommand("plot", "Forgetting chart from result directories");
  plot->add_option("--in", in_dirs, "Result directories")->required()->expected(1, -1);
  plot->add_option("--out", out, "Output SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kUsageError;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(spec_path, out);
    if (run->parsed()) return cmd_run(config, method, out);
    if (ablate->parsed()) return cmd_ablate(config, out);
    if (sw->parsed()) return cmd_sweep(config, taus, lambdas, out);
    return cmd_plot(in_dirs, out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}
