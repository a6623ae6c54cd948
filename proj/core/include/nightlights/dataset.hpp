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

#ifndef NIGHTLIGHTS_DATASET_HPP
#define NIGHTLIGHTS_DATASET_HPP

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nightlights/csv.hpp"
#include "nightlights/diagnostics.hpp"
#include "nightlights/errors.hpp"
#include "nightlights/harmonize.hpp"

namespace nightlights {

NIGHTLIGHTS_DEFINE_ERROR(HeaderMismatch);
NIGHTLIGHTS_DEFINE_ERROR(EmptyDataset);

/// One World Bank indicator: (region, year) -> value.
struct IndicatorTable {
  std::string indicator_id;
  std::map<std::pair<std::string, int>, double> rows;

  std::optional<double> value(const std::string& region_id, int year) const {
    const auto it = rows.find({region_id, year});
    if (it == rows.end()) return std::nullopt;
    return it->second;
  }
};

/// Parses a World Bank wide-format CSV (up to 4 metadata lines, then
/// "Country Name,Country Code,Indicator Name,Indicator Code,1960,...") or a
/// tidy long CSV with header "region_id,year,value", auto-detected. Empty
/// cells are missing values, not zeros.
IndicatorTable parse_worldbank_csv(std::string_view text, Diagnostics* diag = nullptr);

/// The paper's five GDP measures, in its table row order.
enum class TargetName { kRealGdp, kNominalGdp, kPppGdp, kGdpGrowth, kPerCapitaGdpGrowth };

inline constexpr TargetName kAllTargets[] = {
    TargetName::kRealGdp, TargetName::kNominalGdp, TargetName::kPppGdp,
    TargetName::kGdpGrowth, TargetName::kPerCapitaGdpGrowth};

enum class FeaturePair { kLuminosityPopulation, kLuminosityYear };

inline constexpr FeaturePair kAllFeaturePairs[] = {FeaturePair::kLuminosityPopulation,
                                                   FeaturePair::kLuminosityYear};

std::string_view to_string(TargetName target);        ///< machine id, e.g. "real_gdp"
std::string_view display_name(TargetName target);     ///< table label, e.g. "Real GDP"
TargetName target_from_string(std::string_view text);
std::string_view to_string(FeaturePair pair);
FeaturePair feature_pair_from_string(std::string_view text);

struct ScalingRange {
  double min = 0.0;
  double max = 0.0;
};

/// Min/max used to scale each model column to [0, 1].
struct ScalingParams {
  ScalingRange x1;  ///< luminosity
  ScalingRange x2;  ///< population
  ScalingRange x3;  ///< year
  ScalingRange y;   ///< target
};

struct ModelRow {
  std::string region_id;
  int year = 0;
  double x1 = 0.0;  ///< scaled luminosity
  double x2 = 0.0;  ///< scaled population
  double x3 = 0.0;  ///< scaled year
  double y = 0.0;   ///< scaled target
};

/// Model-ready rows for one (target, feature pair): inner-joined on
/// (region, year), rows with any missing component dropped and counted,
/// all columns min-max scaled to [0, 1].
struct ModelDataset {
  TargetName target = TargetName::kRealGdp;
  FeaturePair feature_pair = FeaturePair::kLuminosityPopulation;
  std::vector<ModelRow> rows;  ///< sorted by (region_id, year)
  ScalingParams scaling;
  std::uint64_t dropped_rows = 0;
};

/// x -> (x - min) / (max - min). A constant column maps to all zeros with a
/// DegenerateColumn warning instead of failing.
std::pair<std::vector<double>, ScalingRange> min_max_scale(std::span<const double> column,
                                                           Diagnostics* diag = nullptr,
                                                           std::string_view label = "column");

ModelDataset build_model_dataset(const std::map<std::string, HarmonizedSeries>& luminosity,
                                 const IndicatorTable& population,
                                 const IndicatorTable& target_table, TargetName target,
                                 FeaturePair feature_pair, Diagnostics* diag = nullptr);

/// Countries whose nominal GDP in `reference_year` lies within a factor of
/// `band_factor` of the reference country's, sorted by region id. Emitted as
/// a suggestion for the operator to confirm, never applied silently.
std::vector<std::string> suggest_country_band(const IndicatorTable& nominal_gdp,
                                              const std::string& reference_region,
                                              int reference_year, double band_factor);

/// Tidy export: "region_id,year,x1,x2,x3,y" plus a JSON sidecar of per-column
/// scaling bounds.
std::string dataset_to_csv(const ModelDataset& dataset);
std::string scaling_to_json(const ScalingParams& scaling);

}  // namespace nightlights

#endif  // NIGHTLIGHTS_DATASET_HPP
