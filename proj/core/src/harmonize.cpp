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

#include "nightlights/harmonize.hpp"

#include <algorithm>
#include <cmath>

namespace nightlights {

std::string_view to_string(SeriesSource source) {
  return source == SeriesSource::kDmsp ? "DMSP" : "VIIRS-adjusted";
}

SeriesSource series_source_from_string(std::string_view text) {
  if (text == "DMSP") return SeriesSource::kDmsp;
  if (text == "VIIRS-adjusted") return SeriesSource::kViirsAdjusted;
  throw Error("unknown series source '" + std::string(text) + "'");
}

AnnualComposite seasonal_composite(std::span<const LuminosityObservation> observations,
                                   std::span<const int> season_months, Diagnostics* diag) {
  if (observations.empty()) {
    throw NoSeasonalData("no observations given");
  }
  const LuminosityObservation& first = observations.front();
  for (const LuminosityObservation& obs : observations) {
    if (obs.region_id != first.region_id || obs.year != first.year ||
        obs.sensor != first.sensor) {
      throw std::invalid_argument(
          "seasonal_composite expects observations of one (region, year, sensor)");
    }
  }

  // Pick at most one observation per whitelisted month, in month order, so
  // the mean is evaluated identically on every run.
  AnnualComposite composite;
  composite.region_id = first.region_id;
  composite.year = first.year;
  composite.sensor = first.sensor;

  std::vector<int> season(season_months.begin(), season_months.end());
  std::sort(season.begin(), season.end());

  double total = 0.0;
  for (const int month : season) {
    const auto it = std::find_if(
        observations.begin(), observations.end(),
        [month](const LuminosityObservation& obs) { return obs.month == month; });
    if (it == observations.end()) {
      continue;
    }
    total += it->sum_of_lights;
    composite.months_used.push_back(month);
  }

  if (composite.months_used.empty()) {
    throw NoSeasonalData(first.region_id + " " + std::to_string(first.year) + " " +
                         std::string(to_string(first.sensor)) +
                         ": none of the season months are present");
  }
  if (composite.months_used.size() < season.size()) {
    warn(diag, first.region_id + " " + std::to_string(first.year) + " " +
                   std::string(to_string(first.sensor)) + ": only " +
                   std::to_string(composite.months_used.size()) + " of " +
                   std::to_string(season.size()) + " season months available");
  }
  composite.value = total / static_cast<double>(composite.months_used.size());
  return composite;
}

double calibration_offset(const std::map<int, AnnualComposite>& dmsp,
                          const std::map<int, AnnualComposite>& viirs,
                          std::span<const int> overlap_years) {
  if (overlap_years.empty()) {
    throw std::invalid_argument("overlap year set must not be empty");
  }
  std::vector<int> years(overlap_years.begin(), overlap_years.end());
  std::sort(years.begin(), years.end());

  double total = 0.0;
  for (const int year : years) {
    const auto d = dmsp.find(year);
    if (d == dmsp.end()) {
      throw MissingOverlap("no DMSP composite for overlap year " + std::to_string(year));
    }
    const auto v = viirs.find(year);
    if (v == viirs.end()) {
      throw MissingOverlap("no VIIRS composite for overlap year " + std::to_string(year));
    }
    total += v->second.value - d->second.value;
  }
  return total / static_cast<double>(years.size());
}

HarmonizedSeries harmonize_series(const std::map<int, AnnualComposite>& dmsp,
                                  const std::map<int, AnnualComposite>& viirs, double offset) {
  if (!std::isfinite(offset)) {
    throw Error("calibration offset is not finite");
  }
  HarmonizedSeries series;
  series.offset = offset;
  for (const auto& [year, composite] : dmsp) {
    if (series.region_id.empty()) {
      series.region_id = composite.region_id;
    }
    if (year > kDmspLastYear) {
      continue;  // overlap-only composite, never emitted
    }
    series.points[year] = composite.value;
    series.source[year] = SeriesSource::kDmsp;
  }
  for (const auto& [year, composite] : viirs) {
    if (series.region_id.empty()) {
      series.region_id = composite.region_id;
    }
    if (year <= kDmspLastYear) {
      continue;
    }
    series.points[year] = composite.value - offset;
    series.source[year] = SeriesSource::kViirsAdjusted;
  }
  return series;
}

}  // namespace nightlights
