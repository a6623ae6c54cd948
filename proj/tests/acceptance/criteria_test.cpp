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

// End-to-end acceptance suite. Each test case is one criterion; the custom
// reporter prints a PASS/FAIL line per case.

#include <doctest.h>

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>

#include "acceptance/mem_hook.hpp"
#include "nightlights/csv.hpp"
#include "nightlights/geometry.hpp"
#include "nightlights/harmonize.hpp"
#include "nightlights/io.hpp"
#include "nightlights/pipeline.hpp"
#include "nightlights/raster.hpp"
#include "nightlights/regress.hpp"
#include "nightlights/zonal.hpp"
#include "support/miniworld.hpp"
#include "support/oracles.hpp"

using namespace nightlights;
using nightlights::testing::make_rng;
using nightlights::testing::TempDir;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

RegionMask full_mask(std::uint32_t width, std::uint32_t height) {
  RegionMask mask;
  mask.width = width;
  mask.height = height;
  mask.bits.assign(std::size_t(width) * height, true);
  return mask;
}

int run_cli(const std::string& args) {
  const std::string command = std::string("\"") + NIGHTLIGHTS_CLI_PATH + "\" " + args;
  const int rc = std::system(command.c_str());
  REQUIRE(rc != -1);
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

struct ReportRow {
  std::string target;
  std::string feature_pair;
  double r2 = 0.0;
  long n = 0;
};

std::vector<ReportRow> parse_report(const std::string& csv) {
  CsvReader reader(csv);
  auto header = reader.next_record();
  REQUIRE(header.has_value());
  REQUIRE(*header == std::vector<std::string>{"target", "feature_pair", "a_x1", "a_x2",
                                              "a_x1sq", "a_x1x2", "a_x2sq", "intercept", "r2",
                                              "n"});
  std::vector<ReportRow> rows;
  while (auto record = reader.next_record()) {
    if (record->size() == 1 && (*record)[0].empty()) continue;
    REQUIRE(record->size() == 10);
    ReportRow row;
    row.target = (*record)[0];
    row.feature_pair = (*record)[1];
    row.r2 = parse_double_field((*record)[8], "r2");
    row.n = parse_int_field((*record)[9], "n");
    rows.push_back(std::move(row));
  }
  return rows;
}

const std::vector<std::string> kPaperTargetOrder = {
    "real_gdp", "nominal_gdp", "ppp_gdp", "gdp_growth", "per_capita_gdp_growth"};

}  // namespace

TEST_CASE("criterion 1: GeoTIFF codec round-trips 500 randomized grids bit-exactly") {
  const auto start = std::chrono::steady_clock::now();
  auto rng = make_rng(0xC1);

  const SampleType all_types[] = {SampleType::kUInt8,  SampleType::kUInt16,
                                  SampleType::kUInt32, SampleType::kUInt64,
                                  SampleType::kInt8,   SampleType::kInt16,
                                  SampleType::kInt32,  SampleType::kInt64,
                                  SampleType::kFloat32, SampleType::kFloat64};

  for (int i = 0; i < 500; ++i) {
    const SampleType type = all_types[i % 10];
    RasterGrid grid = testing::random_grid(rng, 64, 64, 0.0, 63.0, false,
                                           SensorUnits::kRadianceNanoWattsPerCm2Sr);
    if (type == SampleType::kFloat32) {
      for (double& v : grid.values) v = static_cast<double>(static_cast<float>(v));
    } else if (type != SampleType::kFloat64) {
      for (double& v : grid.values) v = std::round(v);
    }

    EncodeOptions options;
    options.sample_type = type;
    options.byte_order =
        (i / 10) % 2 == 0 ? TiffByteOrder::kLittleEndian : TiffByteOrder::kBigEndian;
    options.layout = (i / 20) % 2 == 0 ? TiffLayout::kStrips : TiffLayout::kTiles;
    options.compression =
        i % 5 == 0 ? TiffCompression::kDeflate : TiffCompression::kNone;
    if (i % 9 == 0) grid.nodata = 63.0;

    const std::vector<std::byte> bytes = encode_geotiff(grid, options);
    const RasterGrid parsed = parse_geotiff(bytes, grid.sensor_units);
    REQUIRE(parsed.width == grid.width);
    REQUIRE(parsed.height == grid.height);
    REQUIRE(parsed.values == grid.values);
    REQUIRE(parsed.nodata == grid.nodata);
    REQUIRE(parsed.transform.almost_equal(grid.transform, 1e-12));
  }
  const double elapsed = seconds_since(start);
  CHECK(elapsed < 5.0);
  MESSAGE("500 round-trips in ", elapsed, " s");
}

TEST_CASE("criterion 2: windowed reads match full decodes and stream within memory bounds") {
  const auto start = std::chrono::steady_clock::now();
  auto rng = make_rng(0xC2);

  for (int i = 0; i < 100; ++i) {
    EncodeOptions options;
    options.layout = i % 2 == 0 ? TiffLayout::kStrips : TiffLayout::kTiles;
    options.compression = i % 3 == 0 ? TiffCompression::kDeflate : TiffCompression::kNone;
    const RasterGrid grid = testing::random_grid(rng, 64, 64, -10.0, 200.0, false,
                                                 SensorUnits::kRadianceNanoWattsPerCm2Sr);
    const auto bytes = encode_geotiff(grid, options);

    std::uniform_int_distribution<std::uint32_t> col(0, grid.width - 1);
    std::uniform_int_distribution<std::uint32_t> row(0, grid.height - 1);
    const std::uint32_t c0 = col(rng);
    const std::uint32_t r0 = row(rng);
    std::uniform_int_distribution<std::uint32_t> w(1, grid.width - c0);
    std::uniform_int_distribution<std::uint32_t> h(1, grid.height - r0);
    const WindowRect rect{c0, r0, w(rng), h(rng)};
    const RasterWindow window = read_window(bytes, rect, grid.sensor_units);
    for (std::uint32_t rr = 0; rr < rect.height; ++rr) {
      for (std::uint32_t cc = 0; cc < rect.width; ++cc) {
        REQUIRE(window.at(cc, rr) == grid.at(rect.col_offset + cc, rect.row_offset + rr));
      }
    }
  }

  // 8192 x 8192 digital-number raster, written strip by strip, summed through
  // the windowed path with the instrumented allocator watching.
  constexpr std::uint32_t kSide = 8192;
  TempDir dir("nl-big");
  const auto tif = dir.path() / "big.tif";
  std::uint64_t expected_sum = 0;
  {
    std::ofstream out(tif, std::ios::binary);
    REQUIRE(out.good());
    std::vector<double> row_values(kSide);
    EncodeOptions options;
    options.sample_type = SampleType::kUInt8;
    options.rows_per_strip = 64;
    encode_geotiff_stream(
        [&](std::span<const std::byte> chunk) {
          out.write(reinterpret_cast<const char*>(chunk.data()),
                    static_cast<std::streamsize>(chunk.size()));
        },
        kSide, kSide, GeoTransform{-180.0, 90.0, 360.0 / kSide, -180.0 / kSide}, std::nullopt,
        [&](std::uint32_t r) -> std::span<const double> {
          for (std::uint32_t c = 0; c < kSide; ++c) {
            const std::uint64_t v = (std::uint64_t(r) * 31 + std::uint64_t(c) * 7) & 63;
            row_values[c] = static_cast<double>(v);
            expected_sum += v;
          }
          return row_values;
        },
        options);
    REQUIRE(out.good());
  }

  RegionGeometry world;
  world.region_id = "ALL";
  LinearRing ring;
  ring.vertices = {{-180, -90}, {180, -90}, {180, 90}, {-180, 90}, {-180, -90}};
  world.polygons.push_back(PolygonWithHoles{std::move(ring), {}});

  const auto source = std::make_shared<FileSource>(tif);
  const GeoTiffImage image = GeoTiffImage::open(source, SensorUnits::kDigitalNumber);

  memhook::reset_peak();
  const std::uint64_t baseline = memhook::current_bytes();

  const RegionMask mask = rasterize_mask(world, image.transform(), kSide, kSide);
  const ZonalStats stats = zonal_sum(image, mask, Sensor::kDmsp, "ALL");

  const std::uint64_t peak_delta = memhook::peak_bytes() - baseline;
  constexpr std::uint64_t kFullGridBytes = std::uint64_t(kSide) * kSide * sizeof(double);
  MESSAGE("peak additional memory: ", peak_delta, " bytes");
  CHECK(peak_delta < kFullGridBytes / 16);

  CHECK(stats.pixel_count == std::uint64_t(kSide) * kSide);
  CHECK(stats.sum == static_cast<double>(expected_sum));

  const double elapsed = seconds_since(start);
  CHECK(elapsed < 30.0);
  MESSAGE("criterion 2 finished in ", elapsed, " s");
}

TEST_CASE("criterion 3: masks equal exhaustive pixel-center tests; ray casting matches winding") {
  auto rng = make_rng(0xC3);
  std::uniform_real_distribution<double> origin(-8.0, 8.0);
  std::uniform_real_distribution<double> size(0.05, 0.4);

  for (int i = 0; i < 50; ++i) {
    const RegionGeometry region = testing::random_star_polygon(
        rng, origin(rng) * 0.3, origin(rng) * 0.3, 0.5, 4.5, 5 + i % 14);
    const GeoTransform t{origin(rng), origin(rng), size(rng), -size(rng)};
    const std::uint32_t width = 48;
    const std::uint32_t height = 40;
    const RegionMask mask = rasterize_mask(region, t, width, height);

    for (std::uint32_t row = 0; row < height; ++row) {
      for (std::uint32_t col = 0; col < width; ++col) {
        const double lon = t.x_origin + (col + 0.5) * t.x_size;
        const double lat = t.y_origin + (row + 0.5) * t.y_size;
        const bool inside = point_in_region(region, lon, lat);
        const bool in_window = col >= mask.col_offset && row >= mask.row_offset &&
                               col < mask.col_offset + mask.width &&
                               row < mask.row_offset + mask.height;
        const bool bit =
            in_window && mask.test(col - mask.col_offset, row - mask.row_offset);
        REQUIRE(bit == inside);
      }
    }
  }

  std::uniform_real_distribution<double> offset(-4.0, 4.0);
  for (int poly = 0; poly < 50; ++poly) {
    const double cx = offset(rng);
    const double cy = offset(rng);
    const RegionGeometry region =
        testing::random_star_polygon(rng, cx, cy, 0.5, 3.5, 5 + poly % 11);
    for (int i = 0; i < 1000; ++i) {
      const double lon = cx + offset(rng);
      const double lat = cy + offset(rng);
      REQUIRE(point_in_region(region, lon, lat) ==
              testing::winding_number_inside(region, lon, lat));
    }
  }
}

TEST_CASE("criterion 4: zonal sums equal the naive loop; tiled sums equal unsplit sums") {
  auto rng = make_rng(0xC4);

  for (int i = 0; i < 200; ++i) {
    const bool digital = i < 100;
    const RasterGrid grid = testing::random_grid(
        rng, 64, 64, digital ? 0.0 : -5.0, digital ? 63.0 : 1.0e6, digital,
        digital ? SensorUnits::kDigitalNumber : SensorUnits::kRadianceNanoWattsPerCm2Sr);
    RegionMask mask = full_mask(grid.width, grid.height);
    std::bernoulli_distribution bit(0.7);
    for (std::size_t b = 0; b < mask.bits.size(); ++b) mask.bits[b] = bit(rng);

    const Sensor sensor = digital ? Sensor::kDmsp : Sensor::kViirs;
    const GeoTiffImage image = GeoTiffImage::open(
        std::make_shared<MemorySource>(encode_geotiff(grid)), grid.sensor_units);
    const ZonalStats stats = zonal_sum(image, mask, sensor, "RND");

    if (digital) {
      const ZonalStats naive = testing::naive_masked_sum(grid, mask, sensor);
      REQUIRE(stats.sum == naive.sum);
      REQUIRE(stats.pixel_count == naive.pixel_count);
    } else {
      REQUIRE(stats.sum == testing::naive_masked_sum_extended(grid, mask, sensor));
    }
  }

  // Six vertical tiles against the unsplit raster.
  RasterGrid whole;
  whole.width = 96;
  whole.height = 48;
  whole.transform = GeoTransform{-180.0, 60.0, 3.75, -2.5};
  whole.values.resize(std::size_t(whole.width) * whole.height);
  std::uniform_real_distribution<double> value(-2.0, 1000.0);
  for (double& v : whole.values) v = value(rng);

  const GeoTiffImage whole_image = GeoTiffImage::open(
      std::make_shared<MemorySource>(encode_geotiff(whole)), whole.sensor_units);
  const ZonalStats unsplit =
      zonal_sum(whole_image, full_mask(whole.width, whole.height), Sensor::kViirs, "W");

  std::vector<ZonalStats> parts;
  const std::uint32_t tile_width = whole.width / 6;
  for (int tile = 0; tile < 6; ++tile) {
    RasterGrid slice;
    slice.width = tile_width;
    slice.height = whole.height;
    slice.transform = whole.transform;
    slice.transform.x_origin += tile * double(tile_width) * whole.transform.x_size;
    slice.values.resize(std::size_t(slice.width) * slice.height);
    for (std::uint32_t r = 0; r < slice.height; ++r) {
      for (std::uint32_t c = 0; c < slice.width; ++c) {
        slice.values[std::size_t(r) * slice.width + c] = whole.at(tile * tile_width + c, r);
      }
    }
    const GeoTiffImage tile_image = GeoTiffImage::open(
        std::make_shared<MemorySource>(encode_geotiff(slice)), slice.sensor_units);
    parts.push_back(
        zonal_sum(tile_image, full_mask(slice.width, slice.height), Sensor::kViirs, "W"));
  }
  const ZonalStats combined = combine_tiles(parts);
  CHECK(std::abs(combined.sum - unsplit.sum) <= 1e-9 * std::abs(unsplit.sum));
  CHECK(combined.pixel_count == unsplit.pixel_count);
}

TEST_CASE("criterion 5: splices are exact for constant offsets; offset of {3,7} is 5") {
  for (const double c : {-10.0, 0.0, 5.0, 1.0e6}) {
    std::map<int, AnnualComposite> dmsp;
    std::map<int, AnnualComposite> viirs;
    const auto truth = [](int year) { return 100.0 + 3.0 * (year - 1992); };
    for (int year = 1992; year <= 2013; ++year) {
      AnnualComposite composite;
      composite.region_id = "TST";
      composite.year = year;
      composite.sensor = Sensor::kDmsp;
      composite.value = truth(year);
      composite.months_used = {9, 10, 11};
      dmsp[year] = composite;
    }
    for (int year = 2012; year <= 2018; ++year) {
      AnnualComposite composite;
      composite.region_id = "TST";
      composite.year = year;
      composite.sensor = Sensor::kViirs;
      composite.value = truth(year) + c;
      composite.months_used = {9, 10, 11};
      viirs[year] = composite;
    }
    const double offset = calibration_offset(dmsp, viirs);
    REQUIRE(offset == c);
    const HarmonizedSeries series = harmonize_series(dmsp, viirs, offset);
    for (int year = 1992; year <= 2018; ++year) {
      REQUIRE(series.points.count(year) == 1);
      REQUIRE(series.points.at(year) == truth(year));
    }
  }

  std::map<int, AnnualComposite> dmsp;
  std::map<int, AnnualComposite> viirs;
  for (const int year : {2012, 2013}) {
    AnnualComposite d;
    d.region_id = "TST";
    d.year = year;
    d.sensor = Sensor::kDmsp;
    d.value = 40.0;
    dmsp[year] = d;
    AnnualComposite v = d;
    v.sensor = Sensor::kViirs;
    v.value = year == 2012 ? 43.0 : 47.0;
    viirs[year] = v;
  }
  CHECK(calibration_offset(dmsp, viirs) == 5.0);
}

TEST_CASE("criterion 6: planted regressions recover; diagnostics hold on every fit") {
  auto rng = make_rng(0xC6);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  std::uniform_real_distribution<double> x(0.0, 1.0);

  for (int trial = 0; trial < 100; ++trial) {
    std::array<double, 5> planted{};
    for (double& c : planted) c = coef(rng);
    const double intercept = coef(rng);

    std::vector<FittingRow> rows;
    const std::size_t n = 40 + trial % 50;
    for (std::size_t i = 0; i < n; ++i) {
      const FeatureVector z = expand_features(x(rng), x(rng));
      double y = intercept;
      for (std::size_t k = 0; k < 5; ++k) y += planted[k] * z[k];
      rows.push_back(FittingRow{z, y});
    }
    const RegressionFit fit = fit_least_squares(rows);

    for (std::size_t k = 0; k < 5; ++k) {
      REQUIRE(std::abs(fit.coefficients[k] - planted[k]) <= 1e-8);
    }
    REQUIRE(std::abs(fit.intercept - intercept) <= 1e-8);
    REQUIRE(fit.r_squared >= 1.0 - 1e-12);

    // Residual orthogonality against every design column.
    double y_norm = 0.0;
    for (const FittingRow& row : rows) y_norm += row.target * row.target;
    y_norm = std::sqrt(y_norm);
    for (std::size_t col = 0; col < 6; ++col) {
      double dot = 0.0;
      for (const FittingRow& row : rows) {
        double predicted = fit.intercept;
        for (std::size_t k = 0; k < 5; ++k) predicted += fit.coefficients[k] * row.features[k];
        const double column = col < 5 ? row.features[col] : 1.0;
        dot += (row.target - predicted) * column;
      }
      REQUIRE(std::abs(dot) <= 1e-8 * std::max(y_norm, 1.0));
    }

    // Duplicated rows leave the solution unchanged.
    if (trial % 10 == 0) {
      std::vector<FittingRow> doubled = rows;
      doubled.insert(doubled.end(), rows.begin(), rows.end());
      const RegressionFit again = fit_least_squares(doubled);
      for (std::size_t k = 0; k < 5; ++k) {
        REQUIRE(std::abs(again.coefficients[k] - fit.coefficients[k]) <= 1e-10);
      }
      REQUIRE(std::abs(again.intercept - fit.intercept) <= 1e-10);
    }
  }

  // Rank-deficient design rejected with the dependent columns named.
  std::vector<FittingRow> degenerate;
  for (int i = 0; i < 24; ++i) {
    degenerate.push_back(FittingRow{expand_features(0.25, x(rng)), x(rng)});
  }
  try {
    (void)fit_least_squares(degenerate);
    FAIL("expected RankDeficient");
  } catch (const RankDeficient& e) {
    REQUIRE_FALSE(e.dependent_columns().empty());
    MESSAGE("dependent columns: ", std::string(e.what()));
  }
}

TEST_CASE("criterion 7: the mini-world pipeline runs end to end, exactly reproducibly") {
  const auto start = std::chrono::steady_clock::now();

  TempDir dir("nl-accept-world");
  testing::MiniWorldSpec spec;
  spec.root = dir.path();
  spec.workers = 2;
  const testing::MiniWorld world = testing::generate_mini_world(spec);

  const std::string config_arg = "all -c \"" + world.config_path.string() + "\"";
  REQUIRE(run_cli(config_arg + " > /dev/null 2>&1") == 0);
  const double first_run_seconds = seconds_since(start);
  CHECK(first_run_seconds < 60.0);
  MESSAGE("full pipeline in ", first_run_seconds, " s");

  const auto out = dir.path() / "out";
  const std::vector<std::filesystem::path> outputs = {
      out / "observations.csv",
      out / "harmonized.csv",
      out / "harmonized_meta.json",
      out / "report.csv",
      out / "report.md",
      out / "datasets" / "real_gdp_luminosity_population.csv",
      out / "plots" / "real_gdp_luminosity_population.svg",
  };
  std::vector<std::string> first_contents;
  for (const auto& path : outputs) {
    first_contents.push_back(read_text_file(path));
  }

  const auto rows = parse_report(first_contents[3]);
  REQUIRE(rows.size() == 10);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].feature_pair ==
          (i < 5 ? "luminosity_population" : "luminosity_year"));
    CHECK(rows[i].target == kPaperTargetOrder[i % 5]);
    CHECK(rows[i].r2 >= 0.999);
    CHECK(rows[i].n == 81);
  }

  // Markdown mirrors the published two-table, five-row layout.
  const std::string& markdown = first_contents[4];
  CHECK(markdown.find("Luminosity and Population") != std::string::npos);
  CHECK(markdown.find("Luminosity and Year") != std::string::npos);
  CHECK(markdown.find("Intercept") != std::string::npos);
  CHECK(markdown.find("R^2") != std::string::npos);
  for (const char* label : {"Real GDP", "Nominal GDP", "PPP GDP", "GDP Growth",
                            "Per capita GDP growth"}) {
    CHECK(markdown.find(label) != std::string::npos);
  }

  // Second run: byte-identical outputs.
  REQUIRE(run_cli(config_arg + " > /dev/null 2>&1") == 0);
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    REQUIRE(read_text_file(outputs[i]) == first_contents[i]);
  }
}

TEST_CASE("criterion 8: with noise at R2 ~ 0.7, level targets beat differenced targets") {
  TempDir dir("nl-accept-noise");
  testing::MiniWorldSpec spec;
  spec.root = dir.path();
  spec.growth_mode = testing::GrowthMode::kYearOverYearDifference;
  spec.noise_r2 = 0.7;
  const testing::MiniWorld world = testing::generate_mini_world(spec);

  const PipelineConfig config = load_config(world.config_path);
  Diagnostics diag;
  REQUIRE(cmd_all(config, &diag) == kExitOk);

  const auto rows = parse_report(read_text_file(config.output_dir / "report.csv"));
  REQUIRE(rows.size() == 10);

  double min_level = 1.0;
  double max_growth = -1.0;
  for (const ReportRow& row : rows) {
    const bool growth_target =
        row.target == "gdp_growth" || row.target == "per_capita_gdp_growth";
    if (growth_target) {
      max_growth = std::max(max_growth, row.r2);
    } else {
      min_level = std::min(min_level, row.r2);
    }
  }
  MESSAGE("min level R2 = ", min_level, ", max growth R2 = ", max_growth);
  CHECK(min_level > max_growth);
}
