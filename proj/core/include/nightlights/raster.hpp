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

#ifndef NIGHTLIGHTS_RASTER_HPP
#define NIGHTLIGHTS_RASTER_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nightlights/errors.hpp"
#include "nightlights/io.hpp"

namespace nightlights {

NIGHTLIGHTS_DEFINE_ERROR(MalformedTiff);
NIGHTLIGHTS_DEFINE_ERROR(UnsupportedFeature);
NIGHTLIGHTS_DEFINE_ERROR(MissingGeoreference);
NIGHTLIGHTS_DEFINE_ERROR(WindowOutOfBounds);
NIGHTLIGHTS_DEFINE_ERROR(LossyEncoding);
NIGHTLIGHTS_DEFINE_ERROR(InvalidDigitalNumber);

/// What the pixel values mean, tracked per grid instead of per numeric type.
/// DMSP stable-lights composites carry unitless digital numbers in [0, 63];
/// VIIRS DNB composites carry radiance in nanoWatts/cm^2/sr.
enum class SensorUnits {
  kDigitalNumber,
  kRadianceNanoWattsPerCm2Sr,
};

struct LonLat {
  double lon = 0.0;
  double lat = 0.0;
};

/// Affine mapping between pixel indices and geographic coordinates for a
/// north-up raster. (x_origin, y_origin) is the outer corner of pixel (0,0);
/// the center of pixel (col, row) sits half a pixel inward.
struct GeoTransform {
  double x_origin = 0.0;  ///< longitude of the outer corner of pixel (0,0)
  double y_origin = 0.0;  ///< latitude of the same corner
  double x_size = 1.0;    ///< degrees per column, != 0
  double y_size = -1.0;   ///< degrees per row, < 0 for north-up rasters

  bool almost_equal(const GeoTransform& other, double tol) const;
};

struct PixelCoord {
  double col = 0.0;
  double row = 0.0;
};

/// Continuous pixel coordinates of a geographic point; floor() of each
/// component gives the containing pixel. Exact algebraic inverse of
/// pixel_to_geo; may land outside the grid, the caller checks bounds.
PixelCoord geo_to_pixel(const GeoTransform& t, double lon, double lat);

/// Geographic point of continuous pixel coordinates. The center of pixel
/// (col, row) is pixel_to_geo(t, col + 0.5, row + 0.5).
LonLat pixel_to_geo(const GeoTransform& t, double col, double row);

/// Fully decoded raster: row-major 64-bit float pixels plus georeferencing.
/// All pixel values are widened to double at the decode boundary so the rest
/// of the pipeline is type-uniform.
struct RasterGrid {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<double> values;  ///< row-major, width * height entries
  GeoTransform transform;
  std::optional<double> nodata;
  SensorUnits sensor_units = SensorUnits::kRadianceNanoWattsPerCm2Sr;

  double at(std::uint32_t col, std::uint32_t row) const {
    return values[static_cast<std::size_t>(row) * width + col];
  }
  bool is_nodata(double v) const { return nodata.has_value() && v == *nodata; }
};

/// Rectangle of pixels within a parent raster.
struct WindowRect {
  std::uint32_t col_offset = 0;
  std::uint32_t row_offset = 0;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
};

/// Decoded pixels of one window; values are row-major within the window.
struct RasterWindow {
  std::uint32_t col_offset = 0;
  std::uint32_t row_offset = 0;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<double> values;

  double at(std::uint32_t col, std::uint32_t row) const {
    return values[static_cast<std::size_t>(row) * width + col];
  }
};

/// Pixel storage formats the codec can write. Every format decodes to double.
enum class SampleType {
  kUInt8,
  kUInt16,
  kUInt32,
  kUInt64,
  kInt8,
  kInt16,
  kInt32,
  kInt64,
  kFloat32,
  kFloat64,
};

enum class TiffByteOrder { kLittleEndian, kBigEndian };
enum class TiffLayout { kStrips, kTiles };
enum class TiffCompression { kNone, kDeflate };

/// Fixture-encoder knobs. The defaults produce the canonical fixture format:
/// uncompressed, little-endian, one strip per 8 rows.
struct EncodeOptions {
  SampleType sample_type = SampleType::kFloat64;
  TiffByteOrder byte_order = TiffByteOrder::kLittleEndian;
  TiffLayout layout = TiffLayout::kStrips;
  TiffCompression compression = TiffCompression::kNone;
  std::uint32_t rows_per_strip = 8;
  std::uint32_t tile_width = 16;
  std::uint32_t tile_height = 16;
};

/// Single-image GeoTIFF bound to its byte source. Opening parses and
/// validates the directory only; pixels are decoded on demand per window, one
/// strip or tile at a time, so peak transient memory stays proportional to
/// one decode unit plus the requested window.
///
/// Immutable after open(); all read methods are const and safe to call
/// concurrently.
class GeoTiffImage {
public:
  static GeoTiffImage open(std::shared_ptr<const ByteSource> source, SensorUnits units);

  std::uint32_t width() const;
  std::uint32_t height() const;
  const GeoTransform& transform() const;
  std::optional<double> nodata() const;
  SensorUnits sensor_units() const;

  /// Rows covered by one decode unit (strip height or tile height); callers
  /// that stream should read windows aligned to multiples of this.
  std::uint32_t unit_rows() const;

  RasterWindow read_window(const WindowRect& rect) const;
  RasterGrid read_all() const;

  GeoTiffImage(GeoTiffImage&&) noexcept;
  GeoTiffImage& operator=(GeoTiffImage&&) noexcept;
  ~GeoTiffImage();

private:
  struct Impl;
  explicit GeoTiffImage(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

/// Decodes a whole single-image GeoTIFF held in memory.
RasterGrid parse_geotiff(std::span<const std::byte> bytes, SensorUnits units);

/// Decodes only the requested window, touching just the strips or tiles that
/// intersect it.
RasterWindow read_window(std::span<const std::byte> bytes, const WindowRect& rect,
                         SensorUnits units);

/// Encodes a grid as a GeoTIFF that parse_geotiff round-trips bit-exactly at
/// the float-64 level. Throws LossyEncoding if any value cannot be
/// represented in the requested sample type.
std::vector<std::byte> encode_geotiff(const RasterGrid& grid, const EncodeOptions& options = {});

/// Streaming variant for fixtures too large to hold as a RasterGrid: rows are
/// pulled from `row_provider(row)` (which must return `width` values) and the
/// encoded bytes are pushed to `sink` in order. Compression must be kNone so
/// the layout is computable up front.
void encode_geotiff_stream(const std::function<void(std::span<const std::byte>)>& sink,
                           std::uint32_t width, std::uint32_t height,
                           const GeoTransform& transform, std::optional<double> nodata,
                           const std::function<std::span<const double>(std::uint32_t)>& row_provider,
                           const EncodeOptions& options = {});

}  // namespace nightlights

#endif  // NIGHTLIGHTS_RASTER_HPP
