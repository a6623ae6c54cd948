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

#ifndef NIGHTLIGHTS_ZONAL_HPP
#define NIGHTLIGHTS_ZONAL_HPP

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "nightlights/errors.hpp"
#include "nightlights/geometry.hpp"
#include "nightlights/raster.hpp"

namespace nightlights {

NIGHTLIGHTS_DEFINE_ERROR(MixedRegion);
NIGHTLIGHTS_DEFINE_ERROR(InvalidObservation);

enum class Sensor { kDmsp, kViirs };

constexpr SensorUnits units_for(Sensor sensor) {
  return sensor == Sensor::kDmsp ? SensorUnits::kDigitalNumber
                                 : SensorUnits::kRadianceNanoWattsPerCm2Sr;
}

std::string_view to_string(Sensor sensor);
Sensor sensor_from_string(std::string_view text);

/// Per-region "sum of lights" for one composite image.
struct ZonalStats {
  std::string region_id;
  double sum = 0.0;                      ///< sensor units
  std::uint64_t pixel_count = 0;         ///< masked, non-nodata pixels
  std::uint64_t negative_clamped = 0;    ///< VIIRS noise pixels clamped to 0
};

/// Monthly per-country luminosity with sensor provenance.
struct LuminosityObservation {
  std::string region_id;
  int year = 0;
  int month = 0;  ///< 1-12
  Sensor sensor = Sensor::kDmsp;
  double sum_of_lights = 0.0;
  std::uint64_t pixel_count = 0;
  std::uint64_t negative_clamped = 0;
};

/// Checks the sensor's active-year window (DMSP 1992-2013, VIIRS 2012-) and
/// month range; throws InvalidObservation.
void validate_observation(const LuminosityObservation& obs);

struct ZonalOptions {
  /// Scratch budget for one decoded band of rows; the band never holds the
  /// whole grid for rasters larger than this.
  std::uint64_t band_bytes = 4ull << 20;
};

/// Sums pixel values over the mask in fixed row-major order with compensated
/// accumulation. VIIRS negatives are clamped to zero and counted; DMSP values
/// enter as-is. Pixels are read in bands of whole strips or tiles, so peak
/// memory is one band plus one decode unit regardless of raster size.
ZonalStats zonal_sum(const GeoTiffImage& raster, const RegionMask& mask, Sensor sensor,
                     std::string region_id, const ZonalOptions& options = {});

/// Field-wise sum of per-tile statistics, combined in the order given
/// (ascending tile index) so results are order-deterministic. All parts must
/// carry the same region_id.
ZonalStats combine_tiles(std::span<const ZonalStats> parts);

}  // namespace nightlights

#endif  // NIGHTLIGHTS_ZONAL_HPP
