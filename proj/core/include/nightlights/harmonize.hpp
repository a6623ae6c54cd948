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

#ifndef NIGHTLIGHTS_HARMONIZE_HPP
#define NIGHTLIGHTS_HARMONIZE_HPP

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nightlights/diagnostics.hpp"
#include "nightlights/errors.hpp"
#include "nightlights/zonal.hpp"

namespace nightlights {

NIGHTLIGHTS_DEFINE_ERROR(NoSeasonalData);
NIGHTLIGHTS_DEFINE_ERROR(MissingOverlap);

/// Last year sourced from DMSP in a harmonized series; VIIRS supplies
/// everything after. The 2012/2013 overlap itself is used only to estimate
/// the calibration offset.
constexpr int kDmspLastYear = 2012;

/// Default season: September, October, November. Summer months near the
/// poles and snow-glare months are excluded upstream by this whitelist.
inline constexpr int kDefaultSeasonMonths[] = {9, 10, 11};

/// Default overlap years both sensors cover.
inline constexpr int kDefaultOverlapYears[] = {2012, 2013};

/// Annual value for one (region, sensor): the mean of the available seasonal
/// monthly sums.
struct AnnualComposite {
  std::string region_id;
  int year = 0;
  Sensor sensor = Sensor::kDmsp;
  double value = 0.0;
  std::vector<int> months_used;  ///< ascending subset of the season months
};

enum class SeriesSource { kDmsp, kViirsAdjusted };

std::string_view to_string(SeriesSource source);
SeriesSource series_source_from_string(std::string_view text);

/// One region's spliced luminosity series on the DMSP scale: DMSP years pass
/// through unchanged, VIIRS years are shifted down by `offset`.
struct HarmonizedSeries {
  std::string region_id;
  double offset = 0.0;                    ///< VIIRS-minus-DMSP calibration constant
  std::map<int, double> points;           ///< year -> calibrated sum of lights
  std::map<int, SeriesSource> source;     ///< year -> which sensor supplied it
};

/// Mean of the monthly sums among the whitelisted months that are present.
/// Warns when months are missing; throws NoSeasonalData when none remain.
/// All observations must belong to one (region, year, sensor).
AnnualComposite seasonal_composite(std::span<const LuminosityObservation> observations,
                                   std::span<const int> season_months = kDefaultSeasonMonths,
                                   Diagnostics* diag = nullptr);

/// Mean over the overlap years of (viirs - dmsp) composite values. Throws
/// MissingOverlap naming the absent (sensor, year).
double calibration_offset(const std::map<int, AnnualComposite>& dmsp,
                          const std::map<int, AnnualComposite>& viirs,
                          std::span<const int> overlap_years = kDefaultOverlapYears);

/// Splices the two sensors into one series: years through 2012 come from
/// DMSP unchanged, years from 2013 come from VIIRS minus `offset`. Years
/// missing in their source sensor are absent, never interpolated.
HarmonizedSeries harmonize_series(const std::map<int, AnnualComposite>& dmsp,
                                  const std::map<int, AnnualComposite>& viirs, double offset);

}  // namespace nightlights

#endif  // NIGHTLIGHTS_HARMONIZE_HPP
