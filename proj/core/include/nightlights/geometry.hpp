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

#ifndef NIGHTLIGHTS_GEOMETRY_HPP
#define NIGHTLIGHTS_GEOMETRY_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nightlights/diagnostics.hpp"
#include "nightlights/errors.hpp"
#include "nightlights/raster.hpp"

namespace nightlights {

NIGHTLIGHTS_DEFINE_ERROR(MalformedGeoJson);
NIGHTLIGHTS_DEFINE_ERROR(UnsupportedGeometry);
NIGHTLIGHTS_DEFINE_ERROR(MissingIdProperty);

/// Closed ring of lon/lat vertices: first vertex equals the last, at least
/// 4 vertices (a closed triangle).
struct LinearRing {
  std::vector<LonLat> vertices;
};

struct PolygonWithHoles {
  LinearRing exterior;
  std::vector<LinearRing> holes;
};

struct GeoBounds {
  double min_lon = 0.0;
  double min_lat = 0.0;
  double max_lon = 0.0;
  double max_lat = 0.0;
};

/// One country's boundary: a multipolygon in WGS84 lon/lat degrees.
struct RegionGeometry {
  std::string region_id;  ///< ISO-3166 alpha-3 code
  std::string name;
  std::vector<PolygonWithHoles> polygons;

  GeoBounds bounding_box() const;
};

/// Pixel mask of a region over a raster window. A set bit means the pixel
/// center lies inside the geometry under the even-odd rule.
struct RegionMask {
  std::uint32_t col_offset = 0;
  std::uint32_t row_offset = 0;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<bool> bits;  ///< row-major, width * height

  bool empty() const { return width == 0 || height == 0; }
  bool test(std::uint32_t col, std::uint32_t row) const {
    return bits[std::size_t(row) * width + col];
  }
  std::size_t count() const;
};

struct GeoJsonOptions {
  std::string id_property = "ISO_A3";
  std::string name_property = "NAME";
};

/// Parses a GeoJSON Feature or FeatureCollection whose geometries are
/// Polygon or MultiPolygon. Unclosed rings are closed with a warning.
/// Polygons spanning more than 180 degrees of longitude are rejected; split
/// antimeridian-crossing geometries upstream.
std::vector<RegionGeometry> parse_geojson(std::string_view text,
                                          const GeoJsonOptions& options = {},
                                          Diagnostics* diag = nullptr);

/// Even-odd ray-casting test. Points inside a hole are outside. Points on a
/// horizontal edge resolve by the half-open rule (an edge owns its lower
/// endpoint), so adjacent regions in a tiling claim each point exactly once.
bool point_in_region(const RegionGeometry& geometry, double lon, double lat);

/// Materializes the region as a pixel mask: the window is the intersection
/// of the geometry's bounding box (in pixels) with the raster bounds, and a
/// bit is set iff point_in_region holds at the pixel center. A geometry that
/// misses the raster yields an empty mask.
RegionMask rasterize_mask(const RegionGeometry& geometry, const GeoTransform& transform,
                          std::uint32_t raster_width, std::uint32_t raster_height);

}  // namespace nightlights

#endif  // NIGHTLIGHTS_GEOMETRY_HPP
