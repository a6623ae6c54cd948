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

#ifndef NIGHTLIGHTS_SVG_HPP
#define NIGHTLIGHTS_SVG_HPP

#include <string>

#include "nightlights/dataset.hpp"
#include "nightlights/regress.hpp"

namespace nightlights {

/// Scatter of scaled luminosity against the scaled target, one circle per
/// row, with the fitted surface sliced at the median of the second feature
/// drawn as a single polyline. Dependency free and diffable.
std::string scatter_plot_svg(const ModelDataset& dataset, const RegressionFit& fit);

}  // namespace nightlights

#endif  // NIGHTLIGHTS_SVG_HPP
