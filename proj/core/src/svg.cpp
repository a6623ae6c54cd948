/*
 * Copyright 2026 the nightlights authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "nightlights/svg.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "nightlights/csv.hpp"

namespace nightlights {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kMargin = 48.0;

// Scaled data lives in [0, 1]; predictions may poke slightly outside, so the
// y range adapts.
struct Frame {
  double y_min = 0.0;
  double y_max = 1.0;

  double px(double x) const { return kMargin + x * (kWidth - 2 * kMargin); }
  double py(double y) const {
    const double t = (y - y_min) / (y_max - y_min);
    return kHeight - kMargin - t * (kHeight - 2 * kMargin);
  }
};

void append_attr(std::string& out, const char* name, double v) {
  out += " ";
  out += name;
  out += "=\"";
  append_double(out, v);
  out += "\"";
}

}  // namespace

std::string scatter_plot_svg(const ModelDataset& dataset, const RegressionFit& fit) {
  const bool with_population = dataset.feature_pair == FeaturePair::kLuminosityPopulation;

  // Median of the scaled second feature picks the surface slice to draw.
  std::vector<double> second;
  second.reserve(dataset.rows.size());
  for (const ModelRow& row : dataset.rows) {
    second.push_back(with_population ? row.x2 : row.x3);
  }
  std::sort(second.begin(), second.end());
  const double x2_median = second.empty() ? 0.0 : second[(second.size() - 1) / 2];

  constexpr int kCurveSamples = 65;
  std::vector<std::pair<double, double>> curve;
  curve.reserve(kCurveSamples);
  Frame frame;
  for (int i = 0; i < kCurveSamples; ++i) {
    const double x1 = static_cast<double>(i) / (kCurveSamples - 1);
    const double y = fit.predict(x1, x2_median);
    curve.emplace_back(x1, y);
    frame.y_min = std::min(frame.y_min, y);
    frame.y_max = std::max(frame.y_max, y);
  }

  std::string out;
  out +=
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
      "viewBox=\"0 0 640 480\">\n";
  out += "  <title>" + std::string(display_name(dataset.target)) + " vs luminosity (" +
         std::string(to_string(dataset.feature_pair)) + ")</title>\n";
  out += "  <rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"white\"/>\n";

  // Axes.
  out += "  <line";
  append_attr(out, "x1", frame.px(0.0));
  append_attr(out, "y1", frame.py(frame.y_min));
  append_attr(out, "x2", frame.px(1.0));
  append_attr(out, "y2", frame.py(frame.y_min));
  out += " stroke=\"black\"/>\n";
  out += "  <line";
  append_attr(out, "x1", frame.px(0.0));
  append_attr(out, "y1", frame.py(frame.y_min));
  append_attr(out, "x2", frame.px(0.0));
  append_attr(out, "y2", frame.py(frame.y_max));
  out += " stroke=\"black\"/>\n";

  for (const ModelRow& row : dataset.rows) {
    out += "  <circle";
    append_attr(out, "cx", frame.px(row.x1));
    append_attr(out, "cy", frame.py(row.y));
    out += " r=\"3\" fill=\"steelblue\" fill-opacity=\"0.6\"/>\n";
  }

  out += "  <polyline points=\"";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (i > 0) out += " ";
    append_double(out, frame.px(curve[i].first));
    out += ",";
    append_double(out, frame.py(curve[i].second));
  }
  out += "\" fill=\"none\" stroke=\"firebrick\" stroke-width=\"2\"/>\n";
  out += "</svg>\n";
  return out;
}

}  // namespace nightlights
