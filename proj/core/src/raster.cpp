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

#include "nightlights/raster.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <numeric>

namespace nightlights {

namespace {

// TIFF 6.0 tag and type constants, restricted to the subset this codec
// understands. Everything else is rejected loudly.
enum Tag : std::uint16_t {
  kTagImageWidth = 256,
  kTagImageLength = 257,
  kTagBitsPerSample = 258,
  kTagCompression = 259,
  kTagPhotometric = 262,
  kTagStripOffsets = 273,
  kTagSamplesPerPixel = 277,
  kTagRowsPerStrip = 278,
  kTagStripByteCounts = 279,
  kTagPlanarConfig = 284,
  kTagPredictor = 317,
  kTagTileWidth = 322,
  kTagTileLength = 323,
  kTagTileOffsets = 324,
  kTagTileByteCounts = 325,
  kTagSampleFormat = 339,
  kTagModelPixelScale = 33550,
  kTagModelTiepoint = 33922,
  kTagModelTransformation = 34264,
  kTagGeoKeyDirectory = 34735,
  kTagGdalNodata = 42113,
};

enum FieldType : std::uint16_t {
  kTypeByte = 1,
  kTypeAscii = 2,
  kTypeShort = 3,
  kTypeLong = 4,
  kTypeSByte = 6,
  kTypeSShort = 8,
  kTypeSLong = 9,
  kTypeFloat = 11,
  kTypeDouble = 12,
};

enum CompressionCode : std::uint16_t {
  kCompressionNone = 1,
  kCompressionDeflateAdobe = 8,
  kCompressionDeflateLegacy = 32946,
};

enum SampleFormatCode : std::uint16_t {
  kSampleUnsigned = 1,
  kSampleSigned = 2,
  kSampleIeeeFloat = 3,
};

constexpr std::uint16_t kGeoKeyModelType = 1024;
constexpr std::uint16_t kModelTypeGeographic = 2;

std::size_t field_type_size(std::uint16_t type) {
  switch (type) {
    case kTypeByte:
    case kTypeAscii:
    case kTypeSByte:
    case 7:  // UNDEFINED
      return 1;
    case kTypeShort:
    case kTypeSShort:
      return 2;
    case kTypeLong:
    case kTypeSLong:
    case kTypeFloat:
      return 4;
    case 5:   // RATIONAL
    case 10:  // SRATIONAL
    case kTypeDouble:
      return 8;
    default:
      return 0;  // unknown, entry will be skipped
  }
}

std::uint16_t load_u16(const std::byte* p, bool big_endian) {
  const auto b0 = std::to_integer<std::uint16_t>(p[0]);
  const auto b1 = std::to_integer<std::uint16_t>(p[1]);
  return big_endian ? static_cast<std::uint16_t>((b0 << 8) | b1)
                    : static_cast<std::uint16_t>((b1 << 8) | b0);
}

std::uint32_t load_u32(const std::byte* p, bool big_endian) {
  std::uint32_t v = 0;
  if (big_endian) {
    for (int i = 0; i < 4; ++i) v = (v << 8) | std::to_integer<std::uint32_t>(p[i]);
  } else {
    for (int i = 3; i >= 0; --i) v = (v << 8) | std::to_integer<std::uint32_t>(p[i]);
  }
  return v;
}

std::uint64_t load_u64(const std::byte* p, bool big_endian) {
  std::uint64_t v = 0;
  if (big_endian) {
    for (int i = 0; i < 8; ++i) v = (v << 8) | std::to_integer<std::uint64_t>(p[i]);
  } else {
    for (int i = 7; i >= 0; --i) v = (v << 8) | std::to_integer<std::uint64_t>(p[i]);
  }
  return v;
}

void store_u16(std::uint16_t v, std::byte* p, bool big_endian) {
  if (big_endian) {
    p[0] = std::byte(v >> 8);
    p[1] = std::byte(v & 0xff);
  } else {
    p[0] = std::byte(v & 0xff);
    p[1] = std::byte(v >> 8);
  }
}

void store_u32(std::uint32_t v, std::byte* p, bool big_endian) {
  for (int i = 0; i < 4; ++i) {
    const int shift = big_endian ? (24 - 8 * i) : (8 * i);
    p[i] = std::byte((v >> shift) & 0xff);
  }
}

void store_u64(std::uint64_t v, std::byte* p, bool big_endian) {
  for (int i = 0; i < 8; ++i) {
    const int shift = big_endian ? (56 - 8 * i) : (8 * i);
    p[i] = std::byte((v >> shift) & 0xff);
  }
}

double load_f64(const std::byte* p, bool big_endian) {
  return std::bit_cast<double>(load_u64(p, big_endian));
}

// ---------------------------------------------------------------------------
// Sample loaders: one per (format, bits) combination, returning double.

using SampleLoader = double (*)(const std::byte*, bool);

double load_sample_u8(const std::byte* p, bool) {
  return std::to_integer<std::uint8_t>(*p);
}
double load_sample_u16(const std::byte* p, bool be) { return load_u16(p, be); }
double load_sample_u32(const std::byte* p, bool be) { return load_u32(p, be); }
double load_sample_u64(const std::byte* p, bool be) {
  return static_cast<double>(load_u64(p, be));
}
double load_sample_i8(const std::byte* p, bool) {
  return static_cast<double>(static_cast<std::int8_t>(std::to_integer<std::uint8_t>(*p)));
}
double load_sample_i16(const std::byte* p, bool be) {
  return static_cast<double>(static_cast<std::int16_t>(load_u16(p, be)));
}
double load_sample_i32(const std::byte* p, bool be) {
  return static_cast<double>(static_cast<std::int32_t>(load_u32(p, be)));
}
double load_sample_i64(const std::byte* p, bool be) {
  return static_cast<double>(static_cast<std::int64_t>(load_u64(p, be)));
}
double load_sample_f32(const std::byte* p, bool be) {
  return static_cast<double>(std::bit_cast<float>(load_u32(p, be)));
}
double load_sample_f64(const std::byte* p, bool be) { return load_f64(p, be); }

SampleLoader pick_loader(std::uint16_t format, std::uint16_t bits) {
  switch (format) {
    case kSampleUnsigned:
      switch (bits) {
        case 8: return load_sample_u8;
        case 16: return load_sample_u16;
        case 32: return load_sample_u32;
        case 64: return load_sample_u64;
      }
      break;
    case kSampleSigned:
      switch (bits) {
        case 8: return load_sample_i8;
        case 16: return load_sample_i16;
        case 32: return load_sample_i32;
        case 64: return load_sample_i64;
      }
      break;
    case kSampleIeeeFloat:
      switch (bits) {
        case 32: return load_sample_f32;
        case 64: return load_sample_f64;
      }
      break;
    default:
      break;
  }
  return nullptr;
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void inflate_into(std::span<const std::byte> src, std::span<std::byte> dst) {
  z_stream zs{};
  if (inflateInit(&zs) != Z_OK) {
    throw MalformedTiff("zlib init failure");
  }
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<std::byte*>(src.data()));
  zs.avail_in = static_cast<uInt>(src.size());
  zs.next_out = reinterpret_cast<Bytef*>(dst.data());
  zs.avail_out = static_cast<uInt>(dst.size());
  int rc = Z_OK;
  while (rc == Z_OK && zs.avail_out > 0) {
    rc = inflate(&zs, Z_NO_FLUSH);
  }
  const bool filled = zs.avail_out == 0;
  inflateEnd(&zs);
  if (!filled || (rc != Z_OK && rc != Z_STREAM_END)) {
    throw MalformedTiff("Deflate strip or tile does not decompress to its expected size");
  }
}

std::vector<std::byte> deflate_bytes(std::span<const std::byte> src) {
  uLongf bound = compressBound(static_cast<uLong>(src.size()));
  std::vector<std::byte> out(bound);
  const int rc = compress2(reinterpret_cast<Bytef*>(out.data()), &bound,
                           reinterpret_cast<const Bytef*>(src.data()),
                           static_cast<uLong>(src.size()), Z_DEFAULT_COMPRESSION);
  if (rc != Z_OK) {
    throw Error("zlib compression failure");
  }
  out.resize(bound);
  return out;
}

struct TagEntry {
  std::uint16_t type = 0;
  std::uint32_t count = 0;
  std::vector<std::byte> data;  // raw bytes in file byte order
};

}  // namespace

// ---------------------------------------------------------------------------
// Geo transform

bool GeoTransform::almost_equal(const GeoTransform& other, double tol) const {
  return std::abs(x_origin - other.x_origin) <= tol &&
         std::abs(y_origin - other.y_origin) <= tol &&
         std::abs(x_size - other.x_size) <= tol && std::abs(y_size - other.y_size) <= tol;
}

PixelCoord geo_to_pixel(const GeoTransform& t, double lon, double lat) {
  return PixelCoord{(lon - t.x_origin) / t.x_size, (lat - t.y_origin) / t.y_size};
}

LonLat pixel_to_geo(const GeoTransform& t, double col, double row) {
  return LonLat{t.x_origin + col * t.x_size, t.y_origin + row * t.y_size};
}

// ---------------------------------------------------------------------------
// Reader

struct GeoTiffImage::Impl {
  std::shared_ptr<const ByteSource> source;
  bool big_endian = false;
  SensorUnits units = SensorUnits::kRadianceNanoWattsPerCm2Sr;

  std::uint32_t width = 0;
  std::uint32_t height = 0;
  GeoTransform transform;
  std::optional<double> nodata;

  std::uint16_t bits = 0;
  std::uint16_t sample_format = kSampleUnsigned;
  std::uint16_t compression = kCompressionNone;
  SampleLoader loader = nullptr;
  std::size_t sample_bytes = 0;

  bool tiled = false;
  std::uint32_t rows_per_strip = 0;   // strip layout
  std::uint32_t tile_width = 0;       // tile layout
  std::uint32_t tile_height = 0;
  std::vector<std::uint64_t> unit_offsets;
  std::vector<std::uint64_t> unit_counts;

  std::uint32_t unit_rows() const { return tiled ? tile_height : rows_per_strip; }

  // Decodes unit `index` into `scratch`, returning the uncompressed payload.
  // `needed` is the payload size the caller will address.
  std::span<const std::byte> decode_unit(std::size_t index, std::size_t needed,
                                         std::vector<std::byte>& raw,
                                         std::vector<std::byte>& scratch) const {
    const std::uint64_t offset = unit_offsets[index];
    const std::uint64_t count = unit_counts[index];
    if (compression == kCompressionNone) {
      if (count < needed) {
        throw MalformedTiff("strip or tile shorter than its pixel payload");
      }
      raw.resize(needed);
      source->read_at(offset, raw);
      return raw;
    }
    raw.resize(count);
    source->read_at(offset, raw);
    scratch.resize(needed);
    inflate_into(raw, scratch);
    return scratch;
  }
};

namespace {

class TiffDirectory {
public:
  TiffDirectory(const ByteSource& source) : source_(source) {
    const std::uint64_t file_size = source_.size();
    if (file_size < 8) {
      throw MalformedTiff("file shorter than the 8-byte TIFF header");
    }
    std::array<std::byte, 8> header{};
    source_.read_at(0, header);
    const auto b0 = std::to_integer<char>(header[0]);
    const auto b1 = std::to_integer<char>(header[1]);
    if (b0 == 'I' && b1 == 'I') {
      big_endian_ = false;
    } else if (b0 == 'M' && b1 == 'M') {
      big_endian_ = true;
    } else {
      throw MalformedTiff("bad byte-order mark");
    }
    if (load_u16(header.data() + 2, big_endian_) != 42) {
      throw MalformedTiff("bad magic number");
    }
    const std::uint32_t ifd_offset = load_u32(header.data() + 4, big_endian_);
    if (ifd_offset < 8 || ifd_offset + 2 > file_size) {
      throw MalformedTiff("IFD offset out of range");
    }

    std::array<std::byte, 2> count_buf{};
    source_.read_at(ifd_offset, count_buf);
    const std::uint16_t n_entries = load_u16(count_buf.data(), big_endian_);
    if (n_entries == 0) {
      throw MalformedTiff("empty IFD");
    }
    const std::uint64_t entries_bytes = std::uint64_t(n_entries) * 12;
    if (ifd_offset + 2 + entries_bytes + 4 > file_size) {
      throw MalformedTiff("truncated IFD");
    }
    std::vector<std::byte> entries(entries_bytes + 4);
    source_.read_at(ifd_offset + 2, entries);
    if (load_u32(entries.data() + entries_bytes, big_endian_) != 0) {
      throw UnsupportedFeature("multi-image TIFF");
    }

    for (std::uint16_t i = 0; i < n_entries; ++i) {
      const std::byte* e = entries.data() + std::size_t(i) * 12;
      const std::uint16_t tag = load_u16(e, big_endian_);
      const std::uint16_t type = load_u16(e + 2, big_endian_);
      const std::uint32_t count = load_u32(e + 4, big_endian_);
      const std::size_t elem_size = field_type_size(type);
      if (elem_size == 0) {
        continue;  // unknown field type, skip per TIFF 6.0
      }
      const std::uint64_t data_size = std::uint64_t(elem_size) * count;
      if (data_size > (std::uint64_t(1) << 26)) {
        throw MalformedTiff("implausibly large tag payload");
      }
      TagEntry entry;
      entry.type = type;
      entry.count = count;
      entry.data.resize(data_size);
      if (data_size <= 4) {
        std::memcpy(entry.data.data(), e + 8, data_size);
      } else {
        const std::uint32_t value_offset = load_u32(e + 8, big_endian_);
        if (value_offset + data_size > file_size) {
          throw MalformedTiff("tag payload offset out of range");
        }
        source_.read_at(value_offset, entry.data);
      }
      tags_[tag] = std::move(entry);
    }
  }

  bool big_endian() const { return big_endian_; }
  bool has(std::uint16_t tag) const { return tags_.count(tag) != 0; }

  std::vector<std::uint64_t> uints(std::uint16_t tag) const {
    const TagEntry& e = tags_.at(tag);
    std::vector<std::uint64_t> out;
    out.reserve(e.count);
    for (std::uint32_t i = 0; i < e.count; ++i) {
      const std::byte* p = e.data.data();
      switch (e.type) {
        case kTypeByte:
          out.push_back(std::to_integer<std::uint64_t>(p[i]));
          break;
        case kTypeShort:
          out.push_back(load_u16(p + 2 * i, big_endian_));
          break;
        case kTypeLong:
          out.push_back(load_u32(p + 4 * i, big_endian_));
          break;
        default:
          throw MalformedTiff("unexpected field type for integer tag");
      }
    }
    return out;
  }

  std::uint64_t uint_or(std::uint16_t tag, std::uint64_t fallback) const {
    if (!has(tag)) return fallback;
    const auto v = uints(tag);
    if (v.empty()) throw MalformedTiff("empty integer tag");
    return v[0];
  }

  std::vector<double> doubles(std::uint16_t tag) const {
    const TagEntry& e = tags_.at(tag);
    if (e.type != kTypeDouble) {
      throw MalformedTiff("expected DOUBLE field type");
    }
    std::vector<double> out(e.count);
    for (std::uint32_t i = 0; i < e.count; ++i) {
      out[i] = load_f64(e.data.data() + 8 * i, big_endian_);
    }
    return out;
  }

  std::vector<std::uint16_t> shorts(std::uint16_t tag) const {
    const TagEntry& e = tags_.at(tag);
    if (e.type != kTypeShort) {
      throw MalformedTiff("expected SHORT field type");
    }
    std::vector<std::uint16_t> out(e.count);
    for (std::uint32_t i = 0; i < e.count; ++i) {
      out[i] = load_u16(e.data.data() + 2 * i, big_endian_);
    }
    return out;
  }

  std::string ascii(std::uint16_t tag) const {
    const TagEntry& e = tags_.at(tag);
    std::string s(reinterpret_cast<const char*>(e.data.data()), e.data.size());
    while (!s.empty() && s.back() == '\0') s.pop_back();
    return s;
  }

private:
  const ByteSource& source_;
  bool big_endian_ = false;
  std::map<std::uint16_t, TagEntry> tags_;
};

}  // namespace

GeoTiffImage::GeoTiffImage(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
GeoTiffImage::GeoTiffImage(GeoTiffImage&&) noexcept = default;
GeoTiffImage& GeoTiffImage::operator=(GeoTiffImage&&) noexcept = default;
GeoTiffImage::~GeoTiffImage() = default;

std::uint32_t GeoTiffImage::width() const { return impl_->width; }
std::uint32_t GeoTiffImage::height() const { return impl_->height; }
const GeoTransform& GeoTiffImage::transform() const { return impl_->transform; }
std::optional<double> GeoTiffImage::nodata() const { return impl_->nodata; }
SensorUnits GeoTiffImage::sensor_units() const { return impl_->units; }
std::uint32_t GeoTiffImage::unit_rows() const { return impl_->unit_rows(); }

GeoTiffImage GeoTiffImage::open(std::shared_ptr<const ByteSource> source, SensorUnits units) {
  auto impl = std::make_unique<Impl>();
  impl->source = std::move(source);
  impl->units = units;

  const TiffDirectory dir(*impl->source);
  impl->big_endian = dir.big_endian();

  if (!dir.has(kTagImageWidth) || !dir.has(kTagImageLength)) {
    throw MalformedTiff("missing image dimensions");
  }
  const std::uint64_t w = dir.uint_or(kTagImageWidth, 0);
  const std::uint64_t h = dir.uint_or(kTagImageLength, 0);
  if (w == 0 || h == 0 || w > (1u << 30) || h > (1u << 30)) {
    throw MalformedTiff("bad image dimensions");
  }
  impl->width = static_cast<std::uint32_t>(w);
  impl->height = static_cast<std::uint32_t>(h);

  if (dir.uint_or(kTagSamplesPerPixel, 1) != 1) {
    throw UnsupportedFeature("multiple samples per pixel");
  }
  if (dir.uint_or(kTagPlanarConfig, 1) != 1) {
    throw UnsupportedFeature("planar configuration");
  }
  if (dir.uint_or(kTagPhotometric, 1) > 1) {
    throw UnsupportedFeature("photometric interpretation beyond grayscale");
  }
  if (dir.uint_or(kTagPredictor, 1) != 1) {
    throw UnsupportedFeature("predictor");
  }

  const std::uint64_t compression = dir.uint_or(kTagCompression, kCompressionNone);
  if (compression != kCompressionNone && compression != kCompressionDeflateAdobe &&
      compression != kCompressionDeflateLegacy) {
    throw UnsupportedFeature("compression code " + std::to_string(compression) +
                             " (only none and Deflate are supported)");
  }
  impl->compression = static_cast<std::uint16_t>(compression);

  impl->bits = static_cast<std::uint16_t>(dir.uint_or(kTagBitsPerSample, 1));
  impl->sample_format = static_cast<std::uint16_t>(dir.uint_or(kTagSampleFormat, kSampleUnsigned));
  impl->loader = pick_loader(impl->sample_format, impl->bits);
  if (impl->loader == nullptr) {
    throw UnsupportedFeature("sample format " + std::to_string(impl->sample_format) + " with " +
                             std::to_string(impl->bits) + " bits per sample");
  }
  impl->sample_bytes = impl->bits / 8;

  // Pixel data location: strip or tile organized, never both.
  const bool has_strips = dir.has(kTagStripOffsets);
  const bool has_tiles = dir.has(kTagTileOffsets);
  if (has_strips == has_tiles) {
    throw MalformedTiff(has_strips ? "both strip and tile layout present"
                                   : "no strip or tile offsets");
  }
  if (has_strips) {
    impl->tiled = false;
    std::uint64_t rps = dir.uint_or(kTagRowsPerStrip, 0xffffffffu);
    rps = std::min<std::uint64_t>(rps, impl->height);
    if (rps == 0) throw MalformedTiff("RowsPerStrip is zero");
    impl->rows_per_strip = static_cast<std::uint32_t>(rps);
    impl->unit_offsets = dir.uints(kTagStripOffsets);
    if (!dir.has(kTagStripByteCounts)) throw MalformedTiff("missing StripByteCounts");
    impl->unit_counts = dir.uints(kTagStripByteCounts);
    const std::uint64_t n_strips = (impl->height + rps - 1) / rps;
    if (impl->unit_offsets.size() != n_strips || impl->unit_counts.size() != n_strips) {
      throw MalformedTiff("strip table length does not match image height");
    }
  } else {
    impl->tiled = true;
    const std::uint64_t tw = dir.uint_or(kTagTileWidth, 0);
    const std::uint64_t th = dir.uint_or(kTagTileLength, 0);
    if (tw == 0 || th == 0) throw MalformedTiff("bad tile dimensions");
    impl->tile_width = static_cast<std::uint32_t>(tw);
    impl->tile_height = static_cast<std::uint32_t>(th);
    impl->unit_offsets = dir.uints(kTagTileOffsets);
    if (!dir.has(kTagTileByteCounts)) throw MalformedTiff("missing TileByteCounts");
    impl->unit_counts = dir.uints(kTagTileByteCounts);
    const std::uint64_t across = (impl->width + tw - 1) / tw;
    const std::uint64_t down = (impl->height + th - 1) / th;
    if (impl->unit_offsets.size() != across * down ||
        impl->unit_counts.size() != across * down) {
      throw MalformedTiff("tile table length does not match image dimensions");
    }
  }
  const std::uint64_t file_size = impl->source->size();
  for (std::size_t i = 0; i < impl->unit_offsets.size(); ++i) {
    if (impl->unit_offsets[i] + impl->unit_counts[i] > file_size) {
      throw MalformedTiff("strip or tile extends past end of file");
    }
  }

  // Georeferencing: ModelPixelScale + ModelTiepoint only.
  if (dir.has(kTagModelTransformation)) {
    throw UnsupportedFeature("ModelTransformation georeferencing");
  }
  if (!dir.has(kTagModelPixelScale) || !dir.has(kTagModelTiepoint)) {
    throw MissingGeoreference("ModelPixelScale and ModelTiepoint tags are required");
  }
  const auto scale = dir.doubles(kTagModelPixelScale);
  if (scale.size() < 2) throw MalformedTiff("ModelPixelScale needs at least 2 values");
  const auto tiepoint = dir.doubles(kTagModelTiepoint);
  if (tiepoint.size() > 6) throw UnsupportedFeature("multiple tiepoints");
  if (tiepoint.size() < 6) throw MalformedTiff("ModelTiepoint needs 6 values");
  const double sx = scale[0];
  const double sy = scale[1];
  if (!(sx > 0.0) || !(sy > 0.0)) throw MalformedTiff("nonpositive pixel scale");
  // Tiepoint (i, j, 0, x, y, 0): pixel (i, j) outer corner pins to (x, y).
  impl->transform.x_origin = tiepoint[3] - tiepoint[0] * sx;
  impl->transform.y_origin = tiepoint[4] + tiepoint[1] * sy;
  impl->transform.x_size = sx;
  impl->transform.y_size = -sy;

  // GeoKeyDirectory is validated, never acted on: the products this pipeline
  // consumes are plain WGS84 geographic grids.
  if (dir.has(kTagGeoKeyDirectory)) {
    const auto keys = dir.shorts(kTagGeoKeyDirectory);
    if (keys.size() < 4 || keys[0] != 1) {
      throw MalformedTiff("bad GeoKeyDirectory header");
    }
    const std::size_t n_keys = keys[3];
    if (keys.size() < 4 * (n_keys + 1)) {
      throw MalformedTiff("truncated GeoKeyDirectory");
    }
    for (std::size_t k = 1; k <= n_keys; ++k) {
      const std::uint16_t key_id = keys[4 * k];
      const std::uint16_t location = keys[4 * k + 1];
      const std::uint16_t value = keys[4 * k + 3];
      if (key_id == kGeoKeyModelType && location == 0 && value != kModelTypeGeographic) {
        throw UnsupportedFeature("non-geographic model type in GeoKeyDirectory");
      }
    }
  }

  if (dir.has(kTagGdalNodata)) {
    const std::string text = dir.ascii(kTagGdalNodata);
    const char* begin = text.c_str();
    char* end = nullptr;
    const double nd = std::strtod(begin, &end);
    if (end == begin) {
      throw MalformedTiff("unparseable GDAL_NODATA value '" + text + "'");
    }
    impl->nodata = nd;
  }

  return GeoTiffImage(std::move(impl));
}

RasterWindow GeoTiffImage::read_window(const WindowRect& rect) const {
  const Impl& im = *impl_;
  if (rect.col_offset > im.width || rect.width > im.width - rect.col_offset ||
      rect.row_offset > im.height || rect.height > im.height - rect.row_offset) {
    throw WindowOutOfBounds("window " + std::to_string(rect.width) + "x" +
                            std::to_string(rect.height) + "+" + std::to_string(rect.col_offset) +
                            "+" + std::to_string(rect.row_offset) + " exceeds raster " +
                            std::to_string(im.width) + "x" + std::to_string(im.height));
  }

  RasterWindow out;
  out.col_offset = rect.col_offset;
  out.row_offset = rect.row_offset;
  out.width = rect.width;
  out.height = rect.height;
  out.values.resize(std::size_t(rect.width) * rect.height);
  if (out.values.empty()) {
    return out;
  }

  const bool check_dn = im.units == SensorUnits::kDigitalNumber;
  const std::uint32_t c0 = rect.col_offset;
  const std::uint32_t c1 = rect.col_offset + rect.width;
  const std::uint32_t r0 = rect.row_offset;
  const std::uint32_t r1 = rect.row_offset + rect.height;

  std::vector<std::byte> raw;
  std::vector<std::byte> scratch;

  auto emit = [&](std::uint32_t col, std::uint32_t row, double v) {
    if (check_dn && !(im.nodata && v == *im.nodata)) {
      if (!(v >= 0.0 && v <= 63.0) || v != std::floor(v)) {
        throw InvalidDigitalNumber("pixel (" + std::to_string(col) + "," + std::to_string(row) +
                                   ") holds " + format_double(v) +
                                   ", outside the integer range [0, 63]");
      }
    }
    out.values[std::size_t(row - r0) * rect.width + (col - c0)] = v;
  };

  if (!im.tiled) {
    const std::uint32_t rps = im.rows_per_strip;
    for (std::uint32_t strip = r0 / rps; strip <= (r1 - 1) / rps; ++strip) {
      const std::uint32_t strip_row0 = strip * rps;
      const std::uint32_t strip_rows = std::min(rps, im.height - strip_row0);
      const std::size_t needed = std::size_t(strip_rows) * im.width * im.sample_bytes;
      const auto data = im.decode_unit(strip, needed, raw, scratch);
      const std::uint32_t rb = std::max(r0, strip_row0);
      const std::uint32_t re = std::min(r1, strip_row0 + strip_rows);
      for (std::uint32_t r = rb; r < re; ++r) {
        const std::byte* row_bytes =
            data.data() + std::size_t(r - strip_row0) * im.width * im.sample_bytes;
        for (std::uint32_t c = c0; c < c1; ++c) {
          emit(c, r, im.loader(row_bytes + std::size_t(c) * im.sample_bytes, im.big_endian));
        }
      }
    }
  } else {
    const std::uint32_t tw = im.tile_width;
    const std::uint32_t th = im.tile_height;
    const std::uint32_t across = (im.width + tw - 1) / tw;
    for (std::uint32_t ty = r0 / th; ty <= (r1 - 1) / th; ++ty) {
      for (std::uint32_t tx = c0 / tw; tx <= (c1 - 1) / tw; ++tx) {
        const std::size_t needed = std::size_t(tw) * th * im.sample_bytes;
        const auto data = im.decode_unit(std::size_t(ty) * across + tx, needed, raw, scratch);
        const std::uint32_t rb = std::max(r0, ty * th);
        const std::uint32_t re = std::min({r1, ty * th + th, im.height});
        const std::uint32_t cb = std::max(c0, tx * tw);
        const std::uint32_t ce = std::min({c1, tx * tw + tw, im.width});
        for (std::uint32_t r = rb; r < re; ++r) {
          const std::byte* row_bytes =
              data.data() + std::size_t(r - ty * th) * tw * im.sample_bytes;
          for (std::uint32_t c = cb; c < ce; ++c) {
            emit(c, r, im.loader(row_bytes + std::size_t(c - tx * tw) * im.sample_bytes,
                                 im.big_endian));
          }
        }
      }
    }
  }
  return out;
}

RasterGrid GeoTiffImage::read_all() const {
  RasterWindow w = read_window(WindowRect{0, 0, width(), height()});
  RasterGrid grid;
  grid.width = w.width;
  grid.height = w.height;
  grid.values = std::move(w.values);
  grid.transform = transform();
  grid.nodata = nodata();
  grid.sensor_units = sensor_units();
  return grid;
}

RasterGrid parse_geotiff(std::span<const std::byte> bytes, SensorUnits units) {
  auto source = std::make_shared<MemorySource>(bytes);
  return GeoTiffImage::open(source, units).read_all();
}

RasterWindow read_window(std::span<const std::byte> bytes, const WindowRect& rect,
                         SensorUnits units) {
  auto source = std::make_shared<MemorySource>(bytes);
  return GeoTiffImage::open(source, units).read_window(rect);
}

// ---------------------------------------------------------------------------
// Writer

namespace {

struct SampleSpec {
  std::uint16_t format;
  std::uint16_t bits;
  double min;
  double max;  // exclusive bound for 64-bit integer types
  bool integer;
};

SampleSpec sample_spec(SampleType t) {
  switch (t) {
    case SampleType::kUInt8: return {kSampleUnsigned, 8, 0.0, 255.0, true};
    case SampleType::kUInt16: return {kSampleUnsigned, 16, 0.0, 65535.0, true};
    case SampleType::kUInt32: return {kSampleUnsigned, 32, 0.0, 4294967295.0, true};
    case SampleType::kUInt64: return {kSampleUnsigned, 64, 0.0, 18446744073709551616.0, true};
    case SampleType::kInt8: return {kSampleSigned, 8, -128.0, 127.0, true};
    case SampleType::kInt16: return {kSampleSigned, 16, -32768.0, 32767.0, true};
    case SampleType::kInt32: return {kSampleSigned, 32, -2147483648.0, 2147483647.0, true};
    case SampleType::kInt64:
      return {kSampleSigned, 64, -9223372036854775808.0, 9223372036854775808.0, true};
    case SampleType::kFloat32: return {kSampleIeeeFloat, 32, 0.0, 0.0, false};
    case SampleType::kFloat64: return {kSampleIeeeFloat, 64, 0.0, 0.0, false};
  }
  throw std::invalid_argument("unknown sample type");
}

bool representable(const SampleSpec& spec, double v) {
  if (!spec.integer) {
    if (spec.bits == 64) return true;
    return static_cast<double>(static_cast<float>(v)) == v;
  }
  if (!std::isfinite(v) || v != std::trunc(v)) return false;
  if (spec.bits == 64) {
    return v >= spec.min && v < spec.max;  // exclusive: 2^63 / 2^64 overflow
  }
  return v >= spec.min && v <= spec.max;
}

void store_sample(const SampleSpec& spec, double v, std::byte* out, bool big_endian) {
  if (!spec.integer) {
    if (spec.bits == 32) {
      store_u32(std::bit_cast<std::uint32_t>(static_cast<float>(v)), out, big_endian);
    } else {
      store_u64(std::bit_cast<std::uint64_t>(v), out, big_endian);
    }
    return;
  }
  if (spec.format == kSampleUnsigned) {
    const auto u = static_cast<std::uint64_t>(v);
    switch (spec.bits) {
      case 8: out[0] = std::byte(u & 0xff); break;
      case 16: store_u16(static_cast<std::uint16_t>(u), out, big_endian); break;
      case 32: store_u32(static_cast<std::uint32_t>(u), out, big_endian); break;
      case 64: store_u64(u, out, big_endian); break;
    }
  } else {
    const auto s = static_cast<std::int64_t>(v);
    switch (spec.bits) {
      case 8: out[0] = std::byte(static_cast<std::uint8_t>(s)); break;
      case 16: store_u16(static_cast<std::uint16_t>(s), out, big_endian); break;
      case 32: store_u32(static_cast<std::uint32_t>(s), out, big_endian); break;
      case 64: store_u64(static_cast<std::uint64_t>(s), out, big_endian); break;
    }
  }
}

struct IfdEntry {
  std::uint16_t tag;
  std::uint16_t type;
  std::uint32_t count;
  std::vector<std::byte> payload;  // in file byte order
};

IfdEntry make_uint_entry(std::uint16_t tag, std::uint16_t type, std::span<const std::uint64_t> values,
                         bool big_endian) {
  IfdEntry e{tag, type, static_cast<std::uint32_t>(values.size()), {}};
  const std::size_t elem = field_type_size(type);
  e.payload.resize(elem * values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (type == kTypeShort) {
      store_u16(static_cast<std::uint16_t>(values[i]), e.payload.data() + 2 * i, big_endian);
    } else {
      store_u32(static_cast<std::uint32_t>(values[i]), e.payload.data() + 4 * i, big_endian);
    }
  }
  return e;
}

IfdEntry make_double_entry(std::uint16_t tag, std::span<const double> values, bool big_endian) {
  IfdEntry e{tag, kTypeDouble, static_cast<std::uint32_t>(values.size()), {}};
  e.payload.resize(8 * values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    store_u64(std::bit_cast<std::uint64_t>(values[i]), e.payload.data() + 8 * i, big_endian);
  }
  return e;
}

IfdEntry make_ascii_entry(std::uint16_t tag, const std::string& text) {
  IfdEntry e{tag, kTypeAscii, static_cast<std::uint32_t>(text.size() + 1), {}};
  e.payload.resize(text.size() + 1);
  std::memcpy(e.payload.data(), text.data(), text.size());
  e.payload[text.size()] = std::byte(0);
  return e;
}

// Shared skeleton of both writer paths: everything but the pixel payload.
struct TiffPlan {
  bool big_endian = false;
  std::vector<IfdEntry> entries;
  std::vector<std::uint64_t> unit_sizes;      // encoded size per unit
  std::uint32_t data_start = 0;               // file offset of first unit
  std::vector<std::uint32_t> unit_offsets;
};

TiffPlan plan_tiff(std::uint32_t width, std::uint32_t height, const GeoTransform& transform,
                   std::optional<double> nodata, const EncodeOptions& options,
                   std::vector<std::uint64_t> unit_sizes) {
  if (!(transform.x_size > 0.0) || !(transform.y_size < 0.0)) {
    throw std::invalid_argument("encoder requires a north-up transform");
  }
  const SampleSpec spec = sample_spec(options.sample_type);
  const bool be = options.byte_order == TiffByteOrder::kBigEndian;

  TiffPlan plan;
  plan.big_endian = be;
  plan.unit_sizes = std::move(unit_sizes);

  const std::uint16_t compression_code =
      options.compression == TiffCompression::kDeflate ? kCompressionDeflateAdobe
                                                       : kCompressionNone;
  auto u64s = [](std::initializer_list<std::uint64_t> v) {
    return std::vector<std::uint64_t>(v);
  };

  auto& e = plan.entries;
  e.push_back(make_uint_entry(kTagImageWidth, kTypeLong, u64s({width}), be));
  e.push_back(make_uint_entry(kTagImageLength, kTypeLong, u64s({height}), be));
  e.push_back(make_uint_entry(kTagBitsPerSample, kTypeShort, u64s({spec.bits}), be));
  e.push_back(make_uint_entry(kTagCompression, kTypeShort, u64s({compression_code}), be));
  e.push_back(make_uint_entry(kTagPhotometric, kTypeShort, u64s({1}), be));
  e.push_back(make_uint_entry(kTagSamplesPerPixel, kTypeShort, u64s({1}), be));
  if (options.layout == TiffLayout::kStrips) {
    e.push_back(make_uint_entry(kTagRowsPerStrip, kTypeLong, u64s({options.rows_per_strip}), be));
  } else {
    e.push_back(make_uint_entry(kTagTileWidth, kTypeLong, u64s({options.tile_width}), be));
    e.push_back(make_uint_entry(kTagTileLength, kTypeLong, u64s({options.tile_height}), be));
  }
  e.push_back(make_uint_entry(kTagSampleFormat, kTypeShort, u64s({spec.format}), be));

  const double scale[3] = {transform.x_size, -transform.y_size, 0.0};
  const double tiepoint[6] = {0.0, 0.0, 0.0, transform.x_origin, transform.y_origin, 0.0};
  e.push_back(make_double_entry(kTagModelPixelScale, scale, be));
  e.push_back(make_double_entry(kTagModelTiepoint, tiepoint, be));

  const std::uint64_t geokeys[16] = {1, 1, 0, 3, kGeoKeyModelType, 0, 1, kModelTypeGeographic,
                                     1025, 0, 1, 1, 2048, 0, 1, 4326};
  e.push_back(make_uint_entry(kTagGeoKeyDirectory, kTypeShort, geokeys, be));

  if (nodata) {
    e.push_back(make_ascii_entry(kTagGdalNodata, format_double(*nodata)));
  }

  // Offsets and byte counts go in last; their payloads are sized now and the
  // offsets filled once the layout is fixed.
  const std::uint16_t offsets_tag =
      options.layout == TiffLayout::kStrips ? kTagStripOffsets : kTagTileOffsets;
  const std::uint16_t counts_tag =
      options.layout == TiffLayout::kStrips ? kTagStripByteCounts : kTagTileByteCounts;
  e.push_back(make_uint_entry(counts_tag, kTypeLong, plan.unit_sizes, be));
  e.push_back(make_uint_entry(offsets_tag, kTypeLong,
                              std::vector<std::uint64_t>(plan.unit_sizes.size(), 0), be));

  std::sort(e.begin(), e.end(),
            [](const IfdEntry& a, const IfdEntry& b) { return a.tag < b.tag; });

  // Layout: header | IFD | out-of-line payloads | pixel data.
  const std::uint32_t ifd_size = 2 + 12 * static_cast<std::uint32_t>(e.size()) + 4;
  std::uint32_t cursor = 8 + ifd_size;
  for (auto& entry : e) {
    if (entry.payload.size() > 4) {
      cursor = (cursor + 1) & ~1u;
      cursor += static_cast<std::uint32_t>(entry.payload.size());
    }
  }
  cursor = (cursor + 1) & ~1u;
  plan.data_start = cursor;
  plan.unit_offsets.reserve(plan.unit_sizes.size());
  for (const std::uint64_t size : plan.unit_sizes) {
    plan.unit_offsets.push_back(cursor);
    cursor += static_cast<std::uint32_t>(size);
  }

  // Patch the offsets entry now that positions are known.
  for (auto& entry : e) {
    if (entry.tag == offsets_tag) {
      for (std::size_t i = 0; i < plan.unit_offsets.size(); ++i) {
        store_u32(plan.unit_offsets[i], entry.payload.data() + 4 * i, be);
      }
    }
  }
  return plan;
}

// Serializes header, IFD and out-of-line payloads (everything preceding the
// pixel data) for a finished plan.
std::vector<std::byte> render_preamble(const TiffPlan& plan) {
  const bool be = plan.big_endian;
  std::vector<std::byte> out(plan.data_start, std::byte(0));
  out[0] = std::byte(be ? 'M' : 'I');
  out[1] = std::byte(be ? 'M' : 'I');
  store_u16(42, out.data() + 2, be);
  store_u32(8, out.data() + 4, be);

  std::uint32_t cursor = 8;
  store_u16(static_cast<std::uint16_t>(plan.entries.size()), out.data() + cursor, be);
  cursor += 2;

  std::uint32_t payload_cursor = 8 + 2 + 12 * static_cast<std::uint32_t>(plan.entries.size()) + 4;
  for (const auto& entry : plan.entries) {
    store_u16(entry.tag, out.data() + cursor, be);
    store_u16(entry.type, out.data() + cursor + 2, be);
    store_u32(entry.count, out.data() + cursor + 4, be);
    if (entry.payload.size() <= 4) {
      std::memcpy(out.data() + cursor + 8, entry.payload.data(), entry.payload.size());
    } else {
      payload_cursor = (payload_cursor + 1) & ~1u;
      store_u32(payload_cursor, out.data() + cursor + 8, be);
      std::memcpy(out.data() + payload_cursor, entry.payload.data(), entry.payload.size());
      payload_cursor += static_cast<std::uint32_t>(entry.payload.size());
    }
    cursor += 12;
  }
  store_u32(0, out.data() + cursor, be);  // no further IFDs
  return out;
}

void check_representable(const SampleSpec& spec, double v) {
  if (!representable(spec, v)) {
    throw LossyEncoding("value " + format_double(v) +
                        " is not representable in the requested sample format");
  }
}

}  // namespace

std::vector<std::byte> encode_geotiff(const RasterGrid& grid, const EncodeOptions& options) {
  if (grid.values.size() != std::size_t(grid.width) * grid.height || grid.width == 0 ||
      grid.height == 0) {
    throw std::invalid_argument("grid dimensions do not match value count");
  }
  if (options.layout == TiffLayout::kStrips && options.rows_per_strip == 0) {
    throw std::invalid_argument("rows_per_strip must be positive");
  }
  if (options.layout == TiffLayout::kTiles &&
      (options.tile_width == 0 || options.tile_height == 0)) {
    throw std::invalid_argument("tile dimensions must be positive");
  }

  const SampleSpec spec = sample_spec(options.sample_type);
  for (const double v : grid.values) {
    check_representable(spec, v);
  }

  const bool be = options.byte_order == TiffByteOrder::kBigEndian;
  const std::size_t sample_bytes = spec.bits / 8;

  // Assemble the uncompressed payload of every strip or tile.
  std::vector<std::vector<std::byte>> units;
  if (options.layout == TiffLayout::kStrips) {
    const std::uint32_t rps = options.rows_per_strip;
    const std::uint32_t n_strips = (grid.height + rps - 1) / rps;
    units.reserve(n_strips);
    for (std::uint32_t s = 0; s < n_strips; ++s) {
      const std::uint32_t row0 = s * rps;
      const std::uint32_t rows = std::min(rps, grid.height - row0);
      std::vector<std::byte> unit(std::size_t(rows) * grid.width * sample_bytes);
      for (std::uint32_t r = 0; r < rows; ++r) {
        for (std::uint32_t c = 0; c < grid.width; ++c) {
          store_sample(spec, grid.at(c, row0 + r),
                       unit.data() + (std::size_t(r) * grid.width + c) * sample_bytes, be);
        }
      }
      units.push_back(std::move(unit));
    }
  } else {
    const std::uint32_t tw = options.tile_width;
    const std::uint32_t th = options.tile_height;
    const std::uint32_t across = (grid.width + tw - 1) / tw;
    const std::uint32_t down = (grid.height + th - 1) / th;
    units.reserve(std::size_t(across) * down);
    for (std::uint32_t ty = 0; ty < down; ++ty) {
      for (std::uint32_t tx = 0; tx < across; ++tx) {
        std::vector<std::byte> unit(std::size_t(tw) * th * sample_bytes, std::byte(0));
        const std::uint32_t rows = std::min(th, grid.height - ty * th);
        const std::uint32_t cols = std::min(tw, grid.width - tx * tw);
        for (std::uint32_t r = 0; r < rows; ++r) {
          for (std::uint32_t c = 0; c < cols; ++c) {
            store_sample(spec, grid.at(tx * tw + c, ty * th + r),
                         unit.data() + (std::size_t(r) * tw + c) * sample_bytes, be);
          }
        }
        units.push_back(std::move(unit));
      }
    }
  }

  if (options.compression == TiffCompression::kDeflate) {
    for (auto& unit : units) {
      unit = deflate_bytes(unit);
    }
  }

  std::vector<std::uint64_t> unit_sizes;
  unit_sizes.reserve(units.size());
  for (const auto& unit : units) {
    unit_sizes.push_back(unit.size());
  }

  const TiffPlan plan =
      plan_tiff(grid.width, grid.height, grid.transform, grid.nodata, options, unit_sizes);
  std::vector<std::byte> out = render_preamble(plan);
  out.reserve(plan.data_start +
              std::accumulate(unit_sizes.begin(), unit_sizes.end(), std::uint64_t(0)));
  for (const auto& unit : units) {
    out.insert(out.end(), unit.begin(), unit.end());
  }
  return out;
}

void encode_geotiff_stream(const std::function<void(std::span<const std::byte>)>& sink,
                           std::uint32_t width, std::uint32_t height,
                           const GeoTransform& transform, std::optional<double> nodata,
                           const std::function<std::span<const double>(std::uint32_t)>& row_provider,
                           const EncodeOptions& options) {
  if (width == 0 || height == 0) {
    throw std::invalid_argument("empty image");
  }
  if (options.layout != TiffLayout::kStrips || options.compression != TiffCompression::kNone) {
    throw std::invalid_argument("streaming writer emits uncompressed strips only");
  }
  const SampleSpec spec = sample_spec(options.sample_type);
  const std::size_t sample_bytes = spec.bits / 8;
  const std::uint32_t rps = options.rows_per_strip;
  const std::uint32_t n_strips = (height + rps - 1) / rps;

  std::vector<std::uint64_t> unit_sizes(n_strips);
  for (std::uint32_t s = 0; s < n_strips; ++s) {
    const std::uint32_t rows = std::min(rps, height - s * rps);
    unit_sizes[s] = std::uint64_t(rows) * width * sample_bytes;
  }

  const TiffPlan plan = plan_tiff(width, height, transform, nodata, options, unit_sizes);
  const std::vector<std::byte> preamble = render_preamble(plan);
  sink(preamble);

  std::vector<std::byte> row_bytes(std::size_t(width) * sample_bytes);
  for (std::uint32_t r = 0; r < height; ++r) {
    const std::span<const double> row = row_provider(r);
    if (row.size() != width) {
      throw std::invalid_argument("row provider returned wrong width");
    }
    for (std::uint32_t c = 0; c < width; ++c) {
      check_representable(spec, row[c]);
      store_sample(spec, row[c], row_bytes.data() + std::size_t(c) * sample_bytes,
                   plan.big_endian);
    }
    sink(row_bytes);
  }
}

}  // namespace nightlights
