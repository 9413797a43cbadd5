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

#include "ir/chart.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "ir/data_io.hpp"

namespace ir::harness {
namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 500.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 620.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 440.0;
constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_chart_svg(const std::map<std::string, Series>& series,
                             const std::string& x_label, const std::string& y_label) {
  if (series.empty()) throw std::invalid_argument("chart: no series");
  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min;
  double y_min = 0.0;
  double y_max = 0.0;
  for (const auto& [name, points] : series) {
    if (points.empty()) throw std::invalid_argument("chart: series '" + name + "' is empty");
    for (const auto& [x, y] : points) {
      if (!std::isfinite(x) || !std::isfinite(y)) {
        throw std::invalid_argument("chart: non-finite point in '" + name + "'");
      }
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  if (x_max == x_min) {
    x_min -= 0.5;
    x_max += 0.5;
  }
  if (y_max == y_min) y_max = y_min + 1.0;

  auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * (kRight - kLeft); };
  auto py = [&](double y) { return kBottom - (y - y_min) / (y_max - y_min) * (kBottom - kTop); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " + fmt(kWidth) + " " +
         fmt(kHeight) + "\" width=\"800\" height=\"500\"";
  svg += " data-x-min=\"" + fmt(x_min) + "\" data-x-max=\"" + fmt(x_max) + "\"";
  svg += " data-y-min=\"" + fmt(y_min) + "\" data-y-max=\"" + fmt(y_max) + "\"";
  svg += " data-plot-left=\"" + fmt(kLeft) + "\" data-plot-right=\"" + fmt(kRight) + "\"";
  svg += " data-plot-top=\"" + fmt(kTop) + "\" data-plot-bottom=\"" + fmt(kBottom) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"white\"/>\n";

  // Axes.
  svg += "<line class=\"axis\" x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kBottom) + "\" x2=\"" +
         fmt(kRight) + "\" y2=\"" + fmt(kBottom) + "\" stroke=\"black\"/>\n";
  svg += "<line class=\"axis\" x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop) + "\" x2=\"" +
         fmt(kLeft) + "\" y2=\"" + fmt(kBottom) + "\" stroke=\"black\"/>\n";
  constexpr int kTicks = 5;
  for (int k = 0; k <= kTicks; ++k) {
    const double xv = x_min + (x_max - x_min) * k / kTicks;
    const double yv = y_min + (y_max - y_min) * k / kTicks;
    svg += "<text class=\"tick\" x=\"" + fmt(px(xv)) + "\" y=\"" + fmt(kBottom + 18) +
           "\" font-size=\"11\" text-anchor=\"middle\">" + fmt(xv) + "</text>\n";
    svg += "<text class=\"tick\" x=\"" + fmt(kLeft - 6) + "\" y=\"" + fmt(py(yv) + 4) +
           "\" font-size=\"11\" text-anchor=\"end\">" + fmt(yv) + "</text>\n";
  }
  svg += "<text class=\"x-label\" x=\"" + fmt((kLeft + kRight) / 2) + "\" y=\"" +
         fmt(kHeight - 20) + "\" font-size=\"14\" text-anchor=\"middle\">" + escape(x_label) +
         "</text>\n";
  svg += "<text class=\"y-label\" x=\"20\" y=\"" + fmt((kTop + kBottom) / 2) +
         "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 20 " +
         fmt((kTop + kBottom) / 2) + ")\">" + escape(y_label) + "</text>\n";

  std::size_t index = 0;
  for (const auto& [name, points] : series) {
    const char* color = kPalette[index % kPalette.size()];
    std::string coords;
    for (const auto& [x, y] : points) {
      if (!coords.empty()) coords += ' ';
      coords += fmt(px(x)) + "," + fmt(py(y));
    }
    svg += "<polyline class=\"series\" data-label=\"" + escape(name) + "\" fill=\"none\" stroke=\"" +
           color + "\" stroke-width=\"2\" points=\"" + coords + "\"/>\n";
    const double ly = kTop + 10 + 20.0 * static_cast<double>(index);
    svg += "<line class=\"legend\" x1=\"" + fmt(kRight + 20) + "\" y1=\"" + fmt(ly) + "\" x2=\"" +
           fmt(kRight + 45) + "\" y2=\"" + fmt(ly) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    svg += "<text class=\"legend\" x=\"" + fmt(kRight + 50) + "\" y=\"" + fmt(ly + 4) +
           "\" font-size=\"12\">" + escape(name) + "</text>\n";
    ++index;
  }
  svg += "</svg>\n";
  return svg;
}

void render_chart(const std::map<std::string, Series>& series, const std::filesystem::path& out) {
  write_text_file(out, render_chart_svg(series));
}

}  // namespace ir::harness
