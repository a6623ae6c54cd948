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

#include "support/oracles.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <vector>

namespace nightlights::testing {

namespace {

// Winding contribution of one closed ring.
int ring_winding(const LinearRing& ring, double lon, double lat) {
  int winding = 0;
  const auto& v = ring.vertices;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const LonLat& a = v[i];
    const LonLat& b = v[i + 1];
    const double cross = (b.lon - a.lon) * (lat - a.lat) - (lon - a.lon) * (b.lat - a.lat);
    if (a.lat <= lat) {
      if (b.lat > lat && cross > 0) ++winding;
    } else {
      if (b.lat <= lat && cross < 0) --winding;
    }
  }
  return winding;
}

}  // namespace

bool winding_number_inside(const RegionGeometry& region, double lon, double lat) {
  for (const PolygonWithHoles& poly : region.polygons) {
    if (ring_winding(poly.exterior, lon, lat) != 0) {
      bool in_hole = false;
      for (const LinearRing& hole : poly.holes) {
        if (ring_winding(hole, lon, lat) != 0) {
          in_hole = true;
          break;
        }
      }
      if (!in_hole) return true;
    }
  }
  return false;
}

RegionGeometry random_star_polygon(std::mt19937_64& rng, double center_lon, double center_lat,
                                   double radius_min, double radius_max, int vertex_count) {
  std::uniform_real_distribution<double> radius(radius_min, radius_max);
  std::uniform_real_distribution<double> jitter(0.05, 0.95);

  LinearRing ring;
  ring.vertices.reserve(vertex_count + 1);
  for (int i = 0; i < vertex_count; ++i) {
    // Strictly increasing angles keep the polygon simple (star-shaped).
    const double angle = 2.0 * M_PI * (i + jitter(rng)) / vertex_count;
    const double r = radius(rng);
    ring.vertices.push_back(LonLat{center_lon + r * std::cos(angle),
                                   center_lat + r * std::sin(angle)});
  }
  ring.vertices.push_back(ring.vertices.front());

  RegionGeometry region;
  region.region_id = "RND";
  region.polygons.push_back(PolygonWithHoles{std::move(ring), {}});
  return region;
}

RasterGrid random_grid(std::mt19937_64& rng, std::uint32_t max_width, std::uint32_t max_height,
                       double lo, double hi, bool integer_values, SensorUnits units) {
  std::uniform_int_distribution<std::uint32_t> dim_w(1, max_width);
  std::uniform_int_distribution<std::uint32_t> dim_h(1, max_height);
  std::uniform_real_distribution<double> value(lo, hi);

  RasterGrid grid;
  grid.width = dim_w(rng);
  grid.height = dim_h(rng);
  grid.sensor_units = units;
  grid.transform = GeoTransform{-30.0, 20.0, 0.25, -0.25};
  grid.values.resize(std::size_t(grid.width) * grid.height);
  for (double& v : grid.values) {
    v = value(rng);
    if (integer_values) {
      v = std::round(v);
    }
  }
  return grid;
}

ZonalStats naive_masked_sum(const RasterGrid& grid, const RegionMask& mask, Sensor sensor) {
  ZonalStats stats;
  for (std::uint32_t r = 0; r < mask.height; ++r) {
    for (std::uint32_t c = 0; c < mask.width; ++c) {
      if (!mask.test(c, r)) continue;
      double v = grid.at(mask.col_offset + c, mask.row_offset + r);
      if (grid.is_nodata(v)) continue;
      if (sensor == Sensor::kViirs && v < 0.0) {
        v = 0.0;
        ++stats.negative_clamped;
      }
      stats.sum += v;
      ++stats.pixel_count;
    }
  }
  return stats;
}

double naive_masked_sum_extended(const RasterGrid& grid, const RegionMask& mask, Sensor sensor) {
  long double total = 0.0L;
  for (std::uint32_t r = 0; r < mask.height; ++r) {
    for (std::uint32_t c = 0; c < mask.width; ++c) {
      if (!mask.test(c, r)) continue;
      double v = grid.at(mask.col_offset + c, mask.row_offset + r);
      if (grid.is_nodata(v)) continue;
      if (sensor == Sensor::kViirs && v < 0.0) v = 0.0;
      total += static_cast<long double>(v);
    }
  }
  return static_cast<double>(total);
}

bool xml_well_formed(std::string_view text, std::string* error) {
  const auto fail = [&](const std::string& what) {
    if (error != nullptr) *error = what;
    return false;
  };
  std::vector<std::string> stack;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '<') {
      ++i;
      continue;
    }
    const std::size_t close = text.find('>', i);
    if (close == std::string_view::npos) return fail("unterminated tag");
    std::string_view tag = text.substr(i + 1, close - i - 1);
    i = close + 1;
    if (tag.empty()) return fail("empty tag");
    if (tag.front() == '?' || tag.front() == '!') continue;  // prolog / doctype / comment
    const bool closing = tag.front() == '/';
    const bool self_closing = tag.back() == '/';
    if (closing) {
      const std::string name(tag.substr(1));
      if (stack.empty() || stack.back() != name) return fail("mismatched </" + name + ">");
      stack.pop_back();
      continue;
    }
    std::string_view body = self_closing ? tag.substr(0, tag.size() - 1) : tag;
    const std::size_t name_end = body.find_first_of(" \t\r\n");
    const std::string name(name_end == std::string_view::npos ? body : body.substr(0, name_end));
    if (name.empty()) return fail("nameless tag");
    // Attributes must come in name="value" form with balanced quotes.
    std::size_t quotes = 0;
    for (const char c : body) {
      if (c == '"') ++quotes;
    }
    if (quotes % 2 != 0) return fail("unbalanced attribute quotes in <" + name + ">");
    if (!self_closing) stack.push_back(name);
  }
  if (!stack.empty()) return fail("unclosed <" + stack.back() + ">");
  return true;
}

std::size_t count_xml_elements(std::string_view text, std::string_view tag) {
  std::size_t count = 0;
  std::size_t pos = 0;
  const std::string needle = "<" + std::string(tag);
  while ((pos = text.find(needle, pos)) != std::string_view::npos) {
    const std::size_t after = pos + needle.size();
    if (after < text.size() && (text[after] == ' ' || text[after] == '>' || text[after] == '/')) {
      ++count;
    }
    pos = after;
  }
  return count;
}

TempDir::TempDir(const std::string& prefix) {
  static std::atomic<unsigned> counter{0};
  const auto base = std::filesystem::temp_directory_path();
  path_ = base / (prefix + "-" + std::to_string(::getpid()) + "-" +
                  std::to_string(counter.fetch_add(1)));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace nightlights::testing
