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

#include "nightlights/zonal.hpp"

#include <algorithm>

#include "nightlights/kahan.hpp"

namespace nightlights {

std::string_view to_string(Sensor sensor) {
  return sensor == Sensor::kDmsp ? "DMSP" : "VIIRS";
}

Sensor sensor_from_string(std::string_view text) {
  if (text == "DMSP") return Sensor::kDmsp;
  if (text == "VIIRS") return Sensor::kViirs;
  throw InvalidObservation("unknown sensor '" + std::string(text) + "'");
}

void validate_observation(const LuminosityObservation& obs) {
  if (obs.month < 1 || obs.month > 12) {
    throw InvalidObservation(obs.region_id + ": month " + std::to_string(obs.month) +
                             " outside 1-12");
  }
  if (obs.sensor == Sensor::kDmsp && (obs.year < 1992 || obs.year > 2013)) {
    throw InvalidObservation(obs.region_id + ": DMSP observation in " +
                             std::to_string(obs.year) + ", outside active years 1992-2013");
  }
  if (obs.sensor == Sensor::kViirs && obs.year < 2012) {
    throw InvalidObservation(obs.region_id + ": VIIRS observation in " +
                             std::to_string(obs.year) + ", before first active year 2012");
  }
}

ZonalStats zonal_sum(const GeoTiffImage& raster, const RegionMask& mask, Sensor sensor,
                     std::string region_id, const ZonalOptions& options) {
  ZonalStats stats;
  stats.region_id = std::move(region_id);
  if (mask.empty()) {
    return stats;
  }

  const bool clamp_negative = sensor == Sensor::kViirs;
  const std::optional<double> nodata = raster.nodata();

  // Bands are whole multiples of the decode unit height so no strip or tile
  // is decompressed twice.
  const std::uint64_t row_bytes = std::uint64_t(mask.width) * sizeof(double);
  const std::uint32_t unit_rows = std::max<std::uint32_t>(raster.unit_rows(), 1);
  std::uint64_t band_rows = std::max<std::uint64_t>(options.band_bytes / std::max<std::uint64_t>(row_bytes, 1), 1);
  band_rows = std::max<std::uint64_t>(band_rows / unit_rows, 1) * unit_rows;

  CompensatedSum sum;
  std::uint32_t band_start = 0;
  while (band_start < mask.height) {
    // Band edges land on multiples of band_rows in raster space, which are
    // also unit boundaries, so no strip or tile is decoded twice.
    const std::uint64_t raster_row = std::uint64_t(mask.row_offset) + band_start;
    const std::uint64_t band_end = (raster_row / band_rows + 1) * band_rows;
    const auto rows = static_cast<std::uint32_t>(
        std::min<std::uint64_t>(mask.height - band_start, band_end - raster_row));
    const RasterWindow window = raster.read_window(WindowRect{
        mask.col_offset, mask.row_offset + band_start, mask.width, rows});
    for (std::uint32_t r = 0; r < rows; ++r) {
      const std::size_t mask_row = std::size_t(band_start + r) * mask.width;
      for (std::uint32_t c = 0; c < mask.width; ++c) {
        if (!mask.bits[mask_row + c]) {
          continue;
        }
        double v = window.values[std::size_t(r) * mask.width + c];
        if (nodata && v == *nodata) {
          continue;
        }
        if (clamp_negative && v < 0.0) {
          v = 0.0;
          ++stats.negative_clamped;
        }
        sum.add(v);
        ++stats.pixel_count;
      }
    }
    band_start += rows;
  }
  stats.sum = sum.value();
  return stats;
}

ZonalStats combine_tiles(std::span<const ZonalStats> parts) {
  if (parts.empty()) {
    throw std::invalid_argument("combine_tiles needs at least one part");
  }
  ZonalStats total;
  total.region_id = parts.front().region_id;
  CompensatedSum sum;
  for (const ZonalStats& part : parts) {
    if (part.region_id != total.region_id) {
      throw MixedRegion("cannot combine tiles of '" + part.region_id + "' into '" +
                        total.region_id + "'");
    }
    sum.add(part.sum);
    total.pixel_count += part.pixel_count;
    total.negative_clamped += part.negative_clamped;
  }
  total.sum = sum.value();
  return total;
}

}  // namespace nightlights
