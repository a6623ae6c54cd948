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

#include "nightlights/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <bit>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <tuple>

#include "nightlights/geometry.hpp"
#include "nightlights/io.hpp"
#include "nightlights/raster.hpp"
#include "nightlights/svg.hpp"

namespace nightlights {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

fs::path resolve(const fs::path& base, const std::string& path) {
  const fs::path p(path);
  return p.is_absolute() ? p : base / p;
}

std::string require_string(const json& node, const char* key, const std::string& where) {
  if (!node.contains(key) || !node[key].is_string()) {
    throw ConfigError(where + " needs a string field '" + key + "'");
  }
  return node[key].get<std::string>();
}

std::string expand_pattern(const std::string& pattern, int year, int month, int tile) {
  std::string out;
  out.reserve(pattern.size() + 8);
  std::size_t i = 0;
  while (i < pattern.size()) {
    if (pattern[i] != '{') {
      out.push_back(pattern[i++]);
      continue;
    }
    const std::size_t close = pattern.find('}', i);
    if (close == std::string::npos) {
      throw ConfigError("unterminated placeholder in pattern '" + pattern + "'");
    }
    const std::string name = pattern.substr(i + 1, close - i - 1);
    if (name == "year") {
      out += std::to_string(year);
    } else if (name == "month") {
      out += std::to_string(month);
    } else if (name == "month02") {
      if (month < 10) out.push_back('0');
      out += std::to_string(month);
    } else if (name == "tile") {
      out += std::to_string(tile);
    } else {
      throw ConfigError("unknown placeholder {" + name + "} in pattern '" + pattern + "'");
    }
    i = close + 1;
  }
  return out;
}

// Runs fn(0..n) over a small pool; completion order is irrelevant because
// results land in preallocated slots. Exceptions propagate after the pool
// drains.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const int thread_count = static_cast<int>(std::min<std::size_t>(workers, n));
  std::vector<std::thread> pool;
  pool.reserve(thread_count);
  for (int t = 0; t < thread_count; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& thread : pool) thread.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct FileGroup {
  Sensor sensor = Sensor::kDmsp;
  int year = 0;
  int month = 0;
  std::vector<std::shared_ptr<const GeoTiffImage>> tiles;  // ascending tile index
};

// Masks depend only on (region, grid); DMSP composites share one grid across
// years, so the cache collapses hundreds of rasterizations into a handful.
struct MaskKey {
  std::string region;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint64_t x_origin = 0;
  std::uint64_t y_origin = 0;
  std::uint64_t x_size = 0;
  std::uint64_t y_size = 0;

  auto operator<=>(const MaskKey&) const = default;
};

MaskKey make_mask_key(const std::string& region, const GeoTiffImage& image) {
  const GeoTransform& t = image.transform();
  return MaskKey{region,
                 image.width(),
                 image.height(),
                 std::bit_cast<std::uint64_t>(t.x_origin),
                 std::bit_cast<std::uint64_t>(t.y_origin),
                 std::bit_cast<std::uint64_t>(t.x_size),
                 std::bit_cast<std::uint64_t>(t.y_size)};
}

class MaskCache {
public:
  std::shared_ptr<const RegionMask> get(const RegionGeometry& region,
                                        const GeoTiffImage& image) {
    const MaskKey key = make_mask_key(region.region_id, image);
    {
      std::lock_guard lock(mutex_);
      const auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    auto mask = std::make_shared<const RegionMask>(
        rasterize_mask(region, image.transform(), image.width(), image.height()));
    std::lock_guard lock(mutex_);
    return cache_.emplace(key, std::move(mask)).first->second;
  }

private:
  std::mutex mutex_;
  std::map<MaskKey, std::shared_ptr<const RegionMask>> cache_;
};

IndicatorTable load_indicator(const fs::path& path, Diagnostics* diag) {
  return parse_worldbank_csv(read_text_file(path), diag);
}

const fs::path& indicator_path(const PipelineConfig::IndicatorPaths& paths, TargetName target) {
  switch (target) {
    case TargetName::kRealGdp: return paths.real_gdp;
    case TargetName::kNominalGdp: return paths.nominal_gdp;
    case TargetName::kPppGdp: return paths.ppp_gdp;
    case TargetName::kGdpGrowth: return paths.gdp_growth;
    case TargetName::kPerCapitaGdpGrowth: return paths.per_capita_gdp_growth;
  }
  throw std::invalid_argument("unknown target");
}

}  // namespace

PipelineConfig load_config(const fs::path& path) {
  json root;
  try {
    root = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  if (!root.is_object()) {
    throw ConfigError("config root must be a JSON object");
  }
  const fs::path base = path.parent_path();

  PipelineConfig config;
  if (!root.contains("rasters") || !root["rasters"].is_object()) {
    throw ConfigError("config needs a 'rasters' object");
  }
  const json& rasters = root["rasters"];
  config.dmsp_pattern = resolve(base, require_string(rasters, "dmsp_pattern", "rasters")).string();
  config.viirs_pattern =
      resolve(base, require_string(rasters, "viirs_pattern", "rasters")).string();
  config.viirs_tile_count = rasters.value("viirs_tiles", 6);
  if (config.viirs_tile_count < 1) {
    throw ConfigError("rasters.viirs_tiles must be at least 1");
  }

  config.boundaries_path = resolve(base, require_string(root, "boundaries", "config"));
  config.id_property = root.value("id_property", std::string("ISO_A3"));

  if (!root.contains("indicators") || !root["indicators"].is_object()) {
    throw ConfigError("config needs an 'indicators' object");
  }
  const json& ind = root["indicators"];
  config.indicators.population = resolve(base, require_string(ind, "population", "indicators"));
  config.indicators.real_gdp = resolve(base, require_string(ind, "real_gdp", "indicators"));
  config.indicators.nominal_gdp =
      resolve(base, require_string(ind, "nominal_gdp", "indicators"));
  config.indicators.ppp_gdp = resolve(base, require_string(ind, "ppp_gdp", "indicators"));
  config.indicators.gdp_growth = resolve(base, require_string(ind, "gdp_growth", "indicators"));
  config.indicators.per_capita_gdp_growth =
      resolve(base, require_string(ind, "per_capita_gdp_growth", "indicators"));

  if (root.contains("countries")) {
    if (!root["countries"].is_array()) {
      throw ConfigError("'countries' must be an array of region ids");
    }
    for (const auto& c : root["countries"]) {
      config.countries.push_back(c.get<std::string>());
    }
  }
  if (root.contains("country_band")) {
    const json& band = root["country_band"];
    PipelineConfig::CountryBand b;
    b.reference = band.value("reference", std::string("IND"));
    b.year = band.value("year", 2018);
    b.factor = band.value("factor", 4.0);
    config.country_band = b;
  }

  if (root.contains("months")) {
    config.months.clear();
    for (const auto& m : root["months"]) {
      config.months.push_back(m.get<int>());
    }
  }
  for (const int m : config.months) {
    if (m < 1 || m > 12) {
      throw ConfigError("month " + std::to_string(m) + " outside 1-12");
    }
  }
  if (config.months.empty()) {
    throw ConfigError("month whitelist must not be empty");
  }

  if (root.contains("overlap_years")) {
    config.overlap_years.clear();
    for (const auto& y : root["overlap_years"]) {
      config.overlap_years.push_back(y.get<int>());
    }
  }
  if (config.overlap_years.empty()) {
    throw ConfigError("overlap_years must not be empty");
  }

  if (root.contains("years")) {
    config.year_start = root["years"].value("start", 1992);
    config.year_end = root["years"].value("end", 2018);
  }
  if (config.year_start > config.year_end) {
    throw ConfigError("years.start is after years.end");
  }

  config.output_dir = resolve(base, root.value("output_dir", std::string("out")));
  config.streaming_threshold_bytes =
      root.value("streaming_threshold_bytes", std::uint64_t(4ull << 20));
  config.workers = root.value("workers", 1);
  config.per_country = root.value("per_country", false);

  if (!fs::exists(config.boundaries_path)) {
    throw ConfigError("boundaries file does not exist: " + config.boundaries_path.string());
  }
  for (const fs::path* p :
       {&config.indicators.population, &config.indicators.real_gdp,
        &config.indicators.nominal_gdp, &config.indicators.ppp_gdp,
        &config.indicators.gdp_growth, &config.indicators.per_capita_gdp_growth}) {
    if (!fs::exists(*p)) {
      throw ConfigError("indicator file does not exist: " + p->string());
    }
  }
  return config;
}

fs::path observations_csv_path(const PipelineConfig& config) {
  return config.output_dir / "observations.csv";
}

fs::path harmonized_csv_path(const PipelineConfig& config) {
  return config.output_dir / "harmonized.csv";
}

std::string observations_to_csv(const std::vector<LuminosityObservation>& observations) {
  std::string out = "region_id,year,month,sensor,sum_of_lights,pixel_count,negative_clamped\n";
  for (const LuminosityObservation& obs : observations) {
    out += csv_escape(obs.region_id);
    out.push_back(',');
    out += std::to_string(obs.year);
    out.push_back(',');
    out += std::to_string(obs.month);
    out.push_back(',');
    out += to_string(obs.sensor);
    out.push_back(',');
    append_double(out, obs.sum_of_lights);
    out.push_back(',');
    out += std::to_string(obs.pixel_count);
    out.push_back(',');
    out += std::to_string(obs.negative_clamped);
    out.push_back('\n');
  }
  return out;
}

std::vector<LuminosityObservation> observations_from_csv(std::string_view text) {
  CsvReader reader(text);
  auto header = reader.next_record();
  if (!header || header->size() < 7 || (*header)[0] != "region_id") {
    throw MalformedCsv("bad observations header");
  }
  std::vector<LuminosityObservation> observations;
  while (auto record = reader.next_record()) {
    const auto& f = *record;
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() < 7) {
      throw MalformedCsv("observations row with fewer than 7 fields");
    }
    LuminosityObservation obs;
    obs.region_id = f[0];
    obs.year = static_cast<int>(parse_int_field(f[1], "year"));
    obs.month = static_cast<int>(parse_int_field(f[2], "month"));
    obs.sensor = sensor_from_string(f[3]);
    obs.sum_of_lights = parse_double_field(f[4], "sum_of_lights");
    obs.pixel_count = static_cast<std::uint64_t>(parse_int_field(f[5], "pixel_count"));
    obs.negative_clamped =
        static_cast<std::uint64_t>(parse_int_field(f[6], "negative_clamped"));
    validate_observation(obs);
    observations.push_back(std::move(obs));
  }
  return observations;
}

std::string harmonized_to_csv(const std::map<std::string, HarmonizedSeries>& series) {
  std::string out = "region_id,year,value,source,offset\n";
  for (const auto& [region_id, s] : series) {
    for (const auto& [year, value] : s.points) {
      out += csv_escape(region_id);
      out.push_back(',');
      out += std::to_string(year);
      out.push_back(',');
      append_double(out, value);
      out.push_back(',');
      out += to_string(s.source.at(year));
      out.push_back(',');
      append_double(out, s.offset);
      out.push_back('\n');
    }
  }
  return out;
}

std::map<std::string, HarmonizedSeries> harmonized_from_csv(std::string_view text) {
  CsvReader reader(text);
  auto header = reader.next_record();
  if (!header || header->size() < 5 || (*header)[0] != "region_id") {
    throw MalformedCsv("bad harmonized header");
  }
  std::map<std::string, HarmonizedSeries> series;
  while (auto record = reader.next_record()) {
    const auto& f = *record;
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() < 5) {
      throw MalformedCsv("harmonized row with fewer than 5 fields");
    }
    HarmonizedSeries& s = series[f[0]];
    s.region_id = f[0];
    const int year = static_cast<int>(parse_int_field(f[1], "year"));
    s.points[year] = parse_double_field(f[2], "value");
    s.source[year] = series_source_from_string(f[3]);
    s.offset = parse_double_field(f[4], "offset");
  }
  return series;
}

namespace {

std::vector<RegionGeometry> load_regions(const PipelineConfig& config, Diagnostics* diag,
                                         bool* any_region_missing) {
  GeoJsonOptions options;
  options.id_property = config.id_property;
  auto regions = parse_geojson(read_text_file(config.boundaries_path), options, diag);

  std::vector<std::string> wanted = config.countries;
  if (wanted.empty() && config.country_band) {
    const IndicatorTable nominal = load_indicator(config.indicators.nominal_gdp, diag);
    wanted = suggest_country_band(nominal, config.country_band->reference,
                                  config.country_band->year, config.country_band->factor);
    std::string note = "country band selected " + std::to_string(wanted.size()) + " regions:";
    for (const auto& id : wanted) note += " " + id;
    warn(diag, note);
  }
  if (!wanted.empty()) {
    std::vector<RegionGeometry> filtered;
    for (auto& region : regions) {
      if (std::find(wanted.begin(), wanted.end(), region.region_id) != wanted.end()) {
        filtered.push_back(std::move(region));
      }
    }
    for (const auto& id : wanted) {
      const auto found = std::find_if(filtered.begin(), filtered.end(),
                                      [&](const RegionGeometry& r) { return r.region_id == id; });
      if (found == filtered.end()) {
        // This country can only end the run with zero observations.
        warn(diag, "configured country " + id + " is missing from the boundaries file");
        if (any_region_missing != nullptr) *any_region_missing = true;
      }
    }
    regions = std::move(filtered);
  }
  std::sort(regions.begin(), regions.end(),
            [](const RegionGeometry& a, const RegionGeometry& b) {
              return a.region_id < b.region_id;
            });
  return regions;
}

}  // namespace

int cmd_luminosity(const PipelineConfig& config, Diagnostics* diag) {
  bool region_missing = false;
  const std::vector<RegionGeometry> regions = load_regions(config, diag, &region_missing);
  if (regions.empty()) {
    warn(diag, "no regions to process");
    return kExitDataError;
  }

  // Composite enumeration: each sensor's active years clipped to the
  // configured range. The default range covers the 2012/2013 overlap from
  // both sides.
  const int dmsp_first = std::max(1992, config.year_start);
  const int dmsp_last = std::min(2013, config.year_end);
  const int viirs_first = std::max(2012, config.year_start);
  const int viirs_last = config.year_end;

  std::vector<int> months = config.months;
  std::sort(months.begin(), months.end());

  bool partial = false;
  std::vector<FileGroup> groups;
  auto open_image = [&](const std::string& path, Sensor sensor)
      -> std::shared_ptr<const GeoTiffImage> {
    try {
      auto source = std::make_shared<FileSource>(path);
      return std::make_shared<const GeoTiffImage>(
          GeoTiffImage::open(std::move(source), units_for(sensor)));
    } catch (const Error& e) {
      warn(diag, std::string("skipping ") + path + ": " + e.what());
      partial = true;
      return nullptr;
    }
  };

  for (int year = dmsp_first; year <= dmsp_last; ++year) {
    for (const int month : months) {
      auto image = open_image(expand_pattern(config.dmsp_pattern, year, month, 0), Sensor::kDmsp);
      if (!image) continue;
      groups.push_back(FileGroup{Sensor::kDmsp, year, month, {std::move(image)}});
    }
  }
  for (int year = viirs_first; year <= viirs_last; ++year) {
    for (const int month : months) {
      FileGroup group{Sensor::kViirs, year, month, {}};
      bool complete = true;
      for (int tile = 1; tile <= config.viirs_tile_count; ++tile) {
        auto image =
            open_image(expand_pattern(config.viirs_pattern, year, month, tile), Sensor::kViirs);
        if (!image) {
          complete = false;
          break;
        }
        group.tiles.push_back(std::move(image));
      }
      if (!complete) {
        // A missing tile would silently truncate national totals.
        warn(diag, "dropping incomplete VIIRS composite " + std::to_string(year) + "-" +
                       std::to_string(month));
        continue;
      }
      groups.push_back(std::move(group));
    }
  }

  MaskCache masks;
  ZonalOptions zonal_options;
  zonal_options.band_bytes = config.streaming_threshold_bytes;

  const std::size_t n_tasks = regions.size() * groups.size();
  std::vector<LuminosityObservation> observations(n_tasks);
  parallel_for(n_tasks, config.workers, [&](std::size_t task) {
    const RegionGeometry& region = regions[task / groups.size()];
    const FileGroup& group = groups[task % groups.size()];

    std::vector<ZonalStats> parts;
    parts.reserve(group.tiles.size());
    for (const auto& tile : group.tiles) {
      parts.push_back(zonal_sum(*tile, *masks.get(region, *tile), group.sensor,
                                region.region_id, zonal_options));
    }
    const ZonalStats stats = combine_tiles(parts);

    LuminosityObservation obs;
    obs.region_id = region.region_id;
    obs.year = group.year;
    obs.month = group.month;
    obs.sensor = group.sensor;
    obs.sum_of_lights = stats.sum;
    obs.pixel_count = stats.pixel_count;
    obs.negative_clamped = stats.negative_clamped;
    observations[task] = std::move(obs);
  });

  std::sort(observations.begin(), observations.end(),
            [](const LuminosityObservation& a, const LuminosityObservation& b) {
              return std::tie(a.region_id, a.year, a.month, a.sensor) <
                     std::tie(b.region_id, b.year, b.month, b.sensor);
            });

  fs::create_directories(config.output_dir);
  write_text_file(observations_csv_path(config), observations_to_csv(observations));

  if (groups.empty()) {
    warn(diag, "no composites could be read; every region has zero observations");
    return kExitDataError;
  }
  if (region_missing) {
    return kExitDataError;
  }
  return partial ? kExitPartial : kExitOk;
}

int cmd_harmonize(const PipelineConfig& config, Diagnostics* diag,
                  const std::optional<fs::path>& observations_csv) {
  const fs::path input = observations_csv.value_or(observations_csv_path(config));
  const auto observations = observations_from_csv(read_text_file(input));

  // (region, sensor, year) -> that year's monthly observations.
  std::map<std::string, std::map<Sensor, std::map<int, std::vector<LuminosityObservation>>>>
      grouped;
  for (const LuminosityObservation& obs : observations) {
    grouped[obs.region_id][obs.sensor][obs.year].push_back(obs);
  }

  std::map<std::string, HarmonizedSeries> all_series;
  bool partial = false;
  for (const auto& [region_id, by_sensor] : grouped) {
    std::map<int, AnnualComposite> dmsp;
    std::map<int, AnnualComposite> viirs;
    for (const auto& [sensor, by_year] : by_sensor) {
      for (const auto& [year, obs] : by_year) {
        try {
          AnnualComposite composite = seasonal_composite(obs, config.months, diag);
          (sensor == Sensor::kDmsp ? dmsp : viirs)[year] = std::move(composite);
        } catch (const NoSeasonalData& e) {
          warn(diag, std::string("skipping composite: ") + e.what());
          partial = true;
        }
      }
    }
    try {
      const double offset = calibration_offset(dmsp, viirs, config.overlap_years);
      all_series[region_id] = harmonize_series(dmsp, viirs, offset);
    } catch (const Error& e) {
      warn(diag, region_id + ": cannot harmonize: " + e.what());
      partial = true;
    }
  }

  if (all_series.empty()) {
    warn(diag, "no region could be harmonized");
    return kExitDataError;
  }

  fs::create_directories(config.output_dir);
  write_text_file(harmonized_csv_path(config), harmonized_to_csv(all_series));

  // The direction of the adjustment is a modelling decision; the sidecar
  // records it next to the data.
  json meta;
  meta["calibration"] = "viirs_minus_offset";
  meta["dmsp_last_year"] = kDmspLastYear;
  meta["overlap_years"] = config.overlap_years;
  json offsets = json::object();
  for (const auto& [region_id, series] : all_series) {
    offsets[region_id] = series.offset;
  }
  meta["offsets"] = std::move(offsets);
  write_text_file(config.output_dir / "harmonized_meta.json", meta.dump(2) + "\n");

  return partial ? kExitPartial : kExitOk;
}

int cmd_fit(const PipelineConfig& config, Diagnostics* diag,
            const std::optional<fs::path>& harmonized_csv) {
  const fs::path input = harmonized_csv.value_or(harmonized_csv_path(config));
  const auto luminosity = harmonized_from_csv(read_text_file(input));

  const IndicatorTable population = load_indicator(config.indicators.population, diag);
  std::map<TargetName, IndicatorTable> targets;
  for (const TargetName target : kAllTargets) {
    targets[target] = load_indicator(indicator_path(config.indicators, target), diag);
  }

  fs::create_directories(config.output_dir / "datasets");
  fs::create_directories(config.output_dir / "plots");

  AnalysisReport report;
  for (const FeaturePair pair : kAllFeaturePairs) {
    for (const TargetName target : kAllTargets) {
      const std::string stem =
          std::string(to_string(target)) + "_" + std::string(to_string(pair));
      try {
        const ModelDataset dataset =
            build_model_dataset(luminosity, population, targets.at(target), target, pair, diag);
        if (dataset.dropped_rows > 0) {
          warn(diag, stem + ": dropped " + std::to_string(dataset.dropped_rows) +
                         " rows with missing population or target values");
        }
        write_text_file(config.output_dir / "datasets" / (stem + ".csv"),
                        dataset_to_csv(dataset));
        write_text_file(config.output_dir / "datasets" / (stem + ".scaling.json"),
                        scaling_to_json(dataset.scaling));

        AnalysisReport::Cell cell = run_analysis({&dataset, 1}).cells.front();
        if (cell.ok) {
          write_text_file(config.output_dir / "plots" / (stem + ".svg"),
                          scatter_plot_svg(dataset, cell.fit));
        }
        report.cells.push_back(std::move(cell));
      } catch (const Error& e) {
        AnalysisReport::Cell cell;
        cell.target = target;
        cell.feature_pair = pair;
        cell.error = e.what();
        warn(diag, stem + ": " + e.what());
        report.cells.push_back(std::move(cell));
      }
    }
  }

  write_text_file(config.output_dir / "report.csv", report_to_csv(report));
  write_text_file(config.output_dir / "report.md", report_to_markdown(report));

  if (config.per_country) {
    AnalysisReport per_country;
    std::string csv =
        "region_id,target,feature_pair,a_x1,a_x2,a_x1sq,a_x1x2,a_x2sq,intercept,r2,n\n";
    for (const auto& [region_id, series] : luminosity) {
      const std::map<std::string, HarmonizedSeries> one{{region_id, series}};
      for (const FeaturePair pair : kAllFeaturePairs) {
        for (const TargetName target : kAllTargets) {
          AnalysisReport::Cell cell;
          cell.target = target;
          cell.feature_pair = pair;
          try {
            const ModelDataset dataset =
                build_model_dataset(one, population, targets.at(target), target, pair, nullptr);
            cell = run_analysis({&dataset, 1}).cells.front();
          } catch (const Error& e) {
            cell.error = e.what();
          }
          AnalysisReport single;
          single.cells.push_back(cell);
          const std::string row = report_to_csv(single);
          const std::size_t body = row.find('\n') + 1;
          csv += csv_escape(region_id) + "," + row.substr(body);
        }
      }
    }
    write_text_file(config.output_dir / "report_per_country.csv", csv);
  }

  std::size_t failed = 0;
  for (const auto& cell : report.cells) {
    if (!cell.ok) ++failed;
  }
  if (failed == report.cells.size()) return kExitDataError;
  if (failed > 0) return kExitPartial;
  return kExitOk;
}

int cmd_all(const PipelineConfig& config, Diagnostics* diag) {
  const int lum = cmd_luminosity(config, diag);
  if (lum == kExitDataError) return lum;
  const int harm = cmd_harmonize(config, diag);
  if (harm == kExitDataError) return harm;
  const int fit = cmd_fit(config, diag);
  if (fit == kExitDataError) return fit;
  if (lum == kExitPartial || harm == kExitPartial || fit == kExitPartial) {
    return kExitPartial;
  }
  return kExitOk;
}

}  // namespace nightlights
