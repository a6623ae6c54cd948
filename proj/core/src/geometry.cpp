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

#include "nightlights/geometry.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace nightlights {

namespace {

using nlohmann::json;

// Longitude where the edge (a -> b) crosses the horizontal line at `lat`.
// Shared by the point test and the scanline rasterizer so both make
// bit-identical decisions for every pixel center.
inline double edge_crossing_lon(const LonLat& a, const LonLat& b, double lat) {
  return a.lon + (lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
}

// An edge contributes a crossing iff exactly one endpoint is strictly above
// the ray; this owns the lower endpoint and skips horizontal edges.
inline bool edge_crosses(const LonLat& a, const LonLat& b, double lat) {
  return (a.lat > lat) != (b.lat > lat);
}

void toggle_ring(const LinearRing& ring, double lon, double lat, bool& inside) {
  const auto& v = ring.vertices;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    if (edge_crosses(v[i], v[i + 1], lat) && lon < edge_crossing_lon(v[i], v[i + 1], lat)) {
      inside = !inside;
    }
  }
}

void collect_crossings(const LinearRing& ring, double lat, std::vector<double>& out) {
  const auto& v = ring.vertices;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    if (edge_crosses(v[i], v[i + 1], lat)) {
      out.push_back(edge_crossing_lon(v[i], v[i + 1], lat));
    }
  }
}

LinearRing parse_ring(const json& coords, Diagnostics* diag, const std::string& where) {
  if (!coords.is_array() || coords.size() < 3) {
    throw MalformedGeoJson(where + ": ring must be an array of at least 3 positions");
  }
  LinearRing ring;
  ring.vertices.reserve(coords.size() + 1);
  for (const auto& pos : coords) {
    if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number()) {
      throw MalformedGeoJson(where + ": position must be a [lon, lat] number pair");
    }
    const double lon = pos[0].get<double>();
    const double lat = pos[1].get<double>();
    if (!(std::abs(lon) <= 180.0) || !(std::abs(lat) <= 90.0)) {
      throw MalformedGeoJson(where + ": coordinate (" + std::to_string(lon) + ", " +
                             std::to_string(lat) + ") outside WGS84 bounds");
    }
    ring.vertices.push_back(LonLat{lon, lat});
  }
  const LonLat& first = ring.vertices.front();
  const LonLat& last = ring.vertices.back();
  if (first.lon != last.lon || first.lat != last.lat) {
    warn(diag, where + ": unclosed ring, closing it");
    ring.vertices.push_back(first);
  }
  if (ring.vertices.size() < 4) {
    throw MalformedGeoJson(where + ": ring has fewer than 3 distinct vertices");
  }

  double min_lon = std::numeric_limits<double>::infinity();
  double max_lon = -std::numeric_limits<double>::infinity();
  for (const LonLat& p : ring.vertices) {
    min_lon = std::min(min_lon, p.lon);
    max_lon = std::max(max_lon, p.lon);
  }
  if (max_lon - min_lon > 180.0) {
    throw UnsupportedGeometry(where +
                              ": ring spans more than 180 degrees of longitude; "
                              "split antimeridian-crossing polygons before input");
  }
  return ring;
}

PolygonWithHoles parse_polygon(const json& rings, Diagnostics* diag, const std::string& where) {
  if (!rings.is_array() || rings.empty()) {
    throw MalformedGeoJson(where + ": polygon must contain at least one ring");
  }
  PolygonWithHoles poly;
  poly.exterior = parse_ring(rings[0], diag, where);
  for (std::size_t i = 1; i < rings.size(); ++i) {
    poly.holes.push_back(parse_ring(rings[i], diag, where + " hole " + std::to_string(i)));
  }
  return poly;
}

RegionGeometry parse_feature(const json& feature, const GeoJsonOptions& options,
                             Diagnostics* diag) {
  if (!feature.is_object() || feature.value("type", "") != "Feature") {
    throw MalformedGeoJson("expected a Feature object");
  }

  RegionGeometry region;
  const auto props = feature.find("properties");
  if (props == feature.end() || !props->is_object() || !props->contains(options.id_property) ||
      !(*props)[options.id_property].is_string()) {
    throw MissingIdProperty("feature lacks string property '" + options.id_property + "'");
  }
  region.region_id = (*props)[options.id_property].get<std::string>();
  if (props->contains(options.name_property) && (*props)[options.name_property].is_string()) {
    region.name = (*props)[options.name_property].get<std::string>();
  }

  const auto geom = feature.find("geometry");
  if (geom == feature.end() || !geom->is_object()) {
    throw UnsupportedGeometry(region.region_id + ": feature has no geometry object");
  }
  const std::string type = geom->value("type", "");
  const auto coords = geom->find("coordinates");
  if (coords == geom->end()) {
    throw MalformedGeoJson(region.region_id + ": geometry has no coordinates");
  }

  if (type == "Polygon") {
    region.polygons.push_back(parse_polygon(*coords, diag, region.region_id));
  } else if (type == "MultiPolygon") {
    if (!coords->is_array() || coords->empty()) {
      throw MalformedGeoJson(region.region_id + ": MultiPolygon needs at least one polygon");
    }
    std::size_t index = 0;
    for (const auto& poly : *coords) {
      region.polygons.push_back(
          parse_polygon(poly, diag, region.region_id + " polygon " + std::to_string(index++)));
    }
  } else {
    throw UnsupportedGeometry(region.region_id + ": geometry type '" + type +
                              "' (only Polygon and MultiPolygon are supported)");
  }
  return region;
}

}  // namespace

GeoBounds RegionGeometry::bounding_box() const {
  GeoBounds b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
              -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const PolygonWithHoles& poly : polygons) {
    for (const LonLat& p : poly.exterior.vertices) {
      b.min_lon = std::min(b.min_lon, p.lon);
      b.min_lat = std::min(b.min_lat, p.lat);
      b.max_lon = std::max(b.max_lon, p.lon);
      b.max_lat = std::max(b.max_lat, p.lat);
    }
  }
  return b;
}

std::size_t RegionMask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), true));
}

std::vector<RegionGeometry> parse_geojson(std::string_view text, const GeoJsonOptions& options,
                                          Diagnostics* diag) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw MalformedGeoJson(std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) {
    throw MalformedGeoJson("top-level GeoJSON value must be an object");
  }

  std::vector<RegionGeometry> regions;
  const std::string type = root.value("type", "");
  if (type == "FeatureCollection") {
    const auto features = root.find("features");
    if (features == root.end() || !features->is_array()) {
      throw MalformedGeoJson("FeatureCollection lacks a features array");
    }
    regions.reserve(features->size());
    for (const auto& feature : *features) {
      regions.push_back(parse_feature(feature, options, diag));
    }
  } else if (type == "Feature") {
    regions.push_back(parse_feature(root, options, diag));
  } else {
    throw MalformedGeoJson("expected a Feature or FeatureCollection, got '" + type + "'");
  }
  return regions;
}

bool point_in_region(const RegionGeometry& geometry, double lon, double lat) {
  bool inside = false;
  for (const PolygonWithHoles& poly : geometry.polygons) {
    toggle_ring(poly.exterior, lon, lat, inside);
    for (const LinearRing& hole : poly.holes) {
      toggle_ring(hole, lon, lat, inside);
    }
  }
  return inside;
}

RegionMask rasterize_mask(const RegionGeometry& geometry, const GeoTransform& t,
                          std::uint32_t raster_width, std::uint32_t raster_height) {
  if (!(t.x_size > 0.0) || !(t.y_size < 0.0)) {
    throw std::invalid_argument("rasterize_mask requires a north-up transform");
  }
  const GeoBounds bbox = geometry.bounding_box();

  // Pixel range whose cells intersect the bounding box. Continuous pixel
  // coordinates increase with column; rows likewise because y_size < 0.
  const double col_a = geo_to_pixel(t, bbox.min_lon, 0.0).col;
  const double col_b = geo_to_pixel(t, bbox.max_lon, 0.0).col;
  const double row_a = geo_to_pixel(t, 0.0, bbox.max_lat).row;
  const double row_b = geo_to_pixel(t, 0.0, bbox.min_lat).row;

  const double col_lo = std::floor(std::min(col_a, col_b));
  const double col_hi = std::floor(std::max(col_a, col_b));
  const double row_lo = std::floor(std::min(row_a, row_b));
  const double row_hi = std::floor(std::max(row_a, row_b));

  RegionMask mask;
  if (col_hi < 0.0 || row_hi < 0.0 || col_lo >= double(raster_width) ||
      row_lo >= double(raster_height) || !std::isfinite(col_lo) || !std::isfinite(row_lo)) {
    return mask;  // geometry misses the raster entirely
  }

  const auto c0 = static_cast<std::uint32_t>(std::max(col_lo, 0.0));
  const auto c1 = static_cast<std::uint32_t>(std::min(col_hi, double(raster_width - 1)));
  const auto r0 = static_cast<std::uint32_t>(std::max(row_lo, 0.0));
  const auto r1 = static_cast<std::uint32_t>(std::min(row_hi, double(raster_height - 1)));

  mask.col_offset = c0;
  mask.row_offset = r0;
  mask.width = c1 - c0 + 1;
  mask.height = r1 - r0 + 1;
  mask.bits.assign(std::size_t(mask.width) * mask.height, false);

  // Scanline fill: gather all edge crossings of the row's center latitude,
  // then walk pixel centers left to right. Parity of the crossings strictly
  // right of the center reproduces point_in_region bit for bit.
  std::vector<double> crossings;
  for (std::uint32_t r = r0; r <= r1; ++r) {
    const double lat = t.y_origin + (double(r) + 0.5) * t.y_size;
    crossings.clear();
    for (const PolygonWithHoles& poly : geometry.polygons) {
      collect_crossings(poly.exterior, lat, crossings);
      for (const LinearRing& hole : poly.holes) {
        collect_crossings(hole, lat, crossings);
      }
    }
    if (crossings.empty()) {
      continue;
    }
    std::sort(crossings.begin(), crossings.end());
    std::size_t k = 0;
    for (std::uint32_t c = c0; c <= c1; ++c) {
      const double lon = t.x_origin + (double(c) + 0.5) * t.x_size;
      while (k < crossings.size() && !(lon < crossings[k])) {
        ++k;
      }
      if ((crossings.size() - k) % 2 == 1) {
        mask.bits[std::size_t(r - r0) * mask.width + (c - c0)] = true;
      }
    }
  }
  return mask;
}

}  // namespace nightlights
