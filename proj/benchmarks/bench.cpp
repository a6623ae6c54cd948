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

#include <benchmark/benchmark.h>

#include <memory>
#include <random>
#include <vector>

#include "nightlights/geometry.hpp"
#include "nightlights/raster.hpp"
#include "nightlights/regress.hpp"
#include "nightlights/zonal.hpp"

namespace {

using namespace nightlights;

RasterGrid make_grid(std::uint32_t side, bool digital) {
  std::mt19937_64 rng(side);
  std::uniform_real_distribution<double> value(0.0, 63.0);
  RasterGrid grid;
  grid.width = side;
  grid.height = side;
  grid.transform = GeoTransform{-180.0, 90.0, 360.0 / side, -180.0 / side};
  grid.sensor_units =
      digital ? SensorUnits::kDigitalNumber : SensorUnits::kRadianceNanoWattsPerCm2Sr;
  grid.values.resize(std::size_t(side) * side);
  for (double& v : grid.values) {
    v = digital ? std::floor(value(rng)) : value(rng);
  }
  return grid;
}

void BM_DecodeStrips(benchmark::State& state) {
  const auto side = static_cast<std::uint32_t>(state.range(0));
  EncodeOptions options;
  options.sample_type = SampleType::kUInt8;
  const auto bytes = encode_geotiff(make_grid(side, true), options);
  for (auto _ : state) {
    benchmark::DoNotOptimize(parse_geotiff(bytes, SensorUnits::kDigitalNumber));
  }
  state.SetBytesProcessed(std::int64_t(state.iterations()) * side * side);
}
BENCHMARK(BM_DecodeStrips)->Arg(256)->Arg(1024);

void BM_DecodeDeflate(benchmark::State& state) {
  const auto side = static_cast<std::uint32_t>(state.range(0));
  EncodeOptions options;
  options.sample_type = SampleType::kUInt8;
  options.compression = TiffCompression::kDeflate;
  const auto bytes = encode_geotiff(make_grid(side, true), options);
  for (auto _ : state) {
    benchmark::DoNotOptimize(parse_geotiff(bytes, SensorUnits::kDigitalNumber));
  }
  state.SetBytesProcessed(std::int64_t(state.iterations()) * side * side);
}
BENCHMARK(BM_DecodeDeflate)->Arg(1024);

void BM_ZonalSumWindowed(benchmark::State& state) {
  const auto side = static_cast<std::uint32_t>(state.range(0));
  EncodeOptions options;
  options.sample_type = SampleType::kUInt8;
  options.rows_per_strip = 64;
  const RasterGrid grid = make_grid(side, true);
  const auto image = GeoTiffImage::open(
      std::make_shared<MemorySource>(encode_geotiff(grid, options)),
      SensorUnits::kDigitalNumber);

  RegionMask mask;
  mask.width = side;
  mask.height = side;
  mask.bits.assign(std::size_t(side) * side, true);
  for (auto _ : state) {
    benchmark::DoNotOptimize(zonal_sum(image, mask, Sensor::kDmsp, "BM"));
  }
  state.SetBytesProcessed(std::int64_t(state.iterations()) * side * side);
}
BENCHMARK(BM_ZonalSumWindowed)->Arg(1024)->Arg(2048);

void BM_RasterizeMask(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> radius(1.0, 40.0);
  LinearRing ring;
  const int n = 64;
  for (int i = 0; i < n; ++i) {
    const double angle = 2.0 * 3.14159265358979 * i / n;
    const double r = radius(rng);
    ring.vertices.push_back(LonLat{r * std::cos(angle), r * std::sin(angle)});
  }
  ring.vertices.push_back(ring.vertices.front());
  RegionGeometry region;
  region.region_id = "BM";
  region.polygons.push_back(PolygonWithHoles{std::move(ring), {}});

  const GeoTransform t{-180.0, 90.0, 0.1, -0.1};
  for (auto _ : state) {
    benchmark::DoNotOptimize(rasterize_mask(region, t, 3600, 1800));
  }
}
BENCHMARK(BM_RasterizeMask);

void BM_FitLeastSquares(benchmark::State& state) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> x(0.0, 1.0);
  std::vector<FittingRow> rows;
  for (int i = 0; i < 600; ++i) {
    const FeatureVector z = expand_features(x(rng), x(rng));
    rows.push_back(FittingRow{z, 0.4 * z[0] + 3.0 * z[2] - z[4] + 0.02});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_least_squares(rows));
  }
}
BENCHMARK(BM_FitLeastSquares);

}  // namespace

BENCHMARK_MAIN();
