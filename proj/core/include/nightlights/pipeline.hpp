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

#ifndef NIGHTLIGHTS_PIPELINE_HPP
#define NIGHTLIGHTS_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nightlights/dataset.hpp"
#include "nightlights/diagnostics.hpp"
#include "nightlights/errors.hpp"
#include "nightlights/harmonize.hpp"
#include "nightlights/regress.hpp"
#include "nightlights/zonal.hpp"

namespace nightlights {

NIGHTLIGHTS_DEFINE_ERROR(ConfigError);

/// Process exit codes shared by the commands and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitDataError = 2;
inline constexpr int kExitPartial = 3;  ///< some inputs failed, report emitted

/// Runnable description of the whole pipeline. Loaded from a JSON document;
/// relative paths resolve against the config file's directory.
struct PipelineConfig {
  /// Path templates with {year}, {month}, {month02} and, for VIIRS, {tile}
  /// (1-based) placeholders.
  std::string dmsp_pattern;
  std::string viirs_pattern;
  int viirs_tile_count = 6;

  std::filesystem::path boundaries_path;
  std::string id_property = "ISO_A3";

  struct IndicatorPaths {
    std::filesystem::path population;
    std::filesystem::path real_gdp;
    std::filesystem::path nominal_gdp;
    std::filesystem::path ppp_gdp;
    std::filesystem::path gdp_growth;
    std::filesystem::path per_capita_gdp_growth;
  } indicators;

  /// Explicit country universe; when empty and country_band is set, the band
  /// rule selects it (and the chosen list is logged for the operator).
  std::vector<std::string> countries;
  struct CountryBand {
    std::string reference = "IND";
    int year = 2018;
    double factor = 4.0;
  };
  std::optional<CountryBand> country_band;

  std::vector<int> months = {9, 10, 11};
  std::vector<int> overlap_years = {2012, 2013};
  int year_start = 1992;
  int year_end = 2018;

  std::filesystem::path output_dir = "out";
  std::uint64_t streaming_threshold_bytes = 4ull << 20;
  int workers = 1;
  bool per_country = false;
};

PipelineConfig load_config(const std::filesystem::path& path);

/// Standard output locations under the config's output directory.
std::filesystem::path observations_csv_path(const PipelineConfig& config);
std::filesystem::path harmonized_csv_path(const PipelineConfig& config);

// Wire formats for the intermediate CSV files.
std::string observations_to_csv(const std::vector<LuminosityObservation>& observations);
std::vector<LuminosityObservation> observations_from_csv(std::string_view text);
std::string harmonized_to_csv(const std::map<std::string, HarmonizedSeries>& series);
std::map<std::string, HarmonizedSeries> harmonized_from_csv(std::string_view text);

/// Computes per-region monthly sums of lights for every configured
/// (sensor, year, month) composite and writes observations.csv. Decode
/// failures are logged per file and skipped. Returns kExitOk, kExitPartial
/// (some files skipped), or kExitDataError (a region ended with zero
/// observations).
int cmd_luminosity(const PipelineConfig& config, Diagnostics* diag = nullptr);

/// Seasonal composites, offset calibration and splicing; reads the
/// observations CSV (defaults to the standard location) and writes
/// harmonized.csv plus a metadata sidecar.
int cmd_harmonize(const PipelineConfig& config, Diagnostics* diag = nullptr,
                  const std::optional<std::filesystem::path>& observations_csv = std::nullopt);

/// Joins harmonized luminosity with the indicator tables, fits the ten
/// regressions, and writes report.csv, report.md, per-dataset exports and
/// one SVG scatter per fit.
int cmd_fit(const PipelineConfig& config, Diagnostics* diag = nullptr,
            const std::optional<std::filesystem::path>& harmonized_csv = std::nullopt);

/// luminosity, harmonize and fit in sequence over one output directory.
int cmd_all(const PipelineConfig& config, Diagnostics* diag = nullptr);

}  // namespace nightlights

#endif  // NIGHTLIGHTS_PIPELINE_HPP
