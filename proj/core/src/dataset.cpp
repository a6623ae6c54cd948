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

#include "nightlights/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nightlights {

namespace {

constexpr int kMinIndicatorYear = 1960;
constexpr int kMaxIndicatorYear = 2030;

bool is_blank_record(const std::vector<std::string>& fields) {
  return fields.size() == 1 && fields[0].empty();
}

// Wide header: "Country Name","Country Code","Indicator Name","Indicator Code",years...
bool looks_like_wide_header(const std::vector<std::string>& fields) {
  return fields.size() >= 4 && fields[0] == "Country Name" && fields[1] == "Country Code";
}

bool looks_like_long_header(const std::vector<std::string>& fields) {
  return fields.size() >= 3 && fields[0] == "region_id" && fields[1] == "year" &&
         fields[2] == "value";
}

IndicatorTable parse_wide(CsvReader& reader, const std::vector<std::string>& header,
                          Diagnostics* diag) {
  IndicatorTable table;

  std::vector<std::pair<std::size_t, int>> year_columns;
  for (std::size_t i = 4; i < header.size(); ++i) {
    if (header[i].empty()) {
      continue;  // trailing comma produces one empty header cell
    }
    int year = 0;
    try {
      year = static_cast<int>(parse_int_field(header[i], "year header"));
    } catch (const MalformedCsv&) {
      continue;  // non-year trailing columns are ignored
    }
    if (year < kMinIndicatorYear || year > kMaxIndicatorYear) {
      warn(diag, "ignoring out-of-range year column " + header[i]);
      continue;
    }
    year_columns.emplace_back(i, year);
  }
  if (year_columns.empty()) {
    throw HeaderMismatch("wide-format header has no year columns");
  }

  while (auto record = reader.next_record()) {
    const auto& fields = *record;
    if (is_blank_record(fields)) {
      continue;
    }
    if (fields.size() < 4) {
      throw MalformedCsv("data row with fewer than 4 metadata fields");
    }
    const std::string& region = fields[1];
    if (region.empty()) {
      throw MalformedCsv("data row with empty country code");
    }
    if (table.indicator_id.empty() && fields.size() > 3) {
      table.indicator_id = fields[3];
    }
    for (const auto& [column, year] : year_columns) {
      if (column >= fields.size() || fields[column].empty()) {
        continue;  // missing value
      }
      const double value =
          parse_double_field(fields[column], region + " " + std::to_string(year));
      if (!std::isfinite(value)) {
        throw MalformedCsv(region + " " + std::to_string(year) + ": non-finite value");
      }
      table.rows[{region, year}] = value;
    }
  }
  return table;
}

IndicatorTable parse_long(CsvReader& reader, Diagnostics* diag) {
  IndicatorTable table;
  (void)diag;
  while (auto record = reader.next_record()) {
    const auto& fields = *record;
    if (is_blank_record(fields)) {
      continue;
    }
    if (fields.size() < 3) {
      throw MalformedCsv("long-format row needs region_id,year,value");
    }
    if (fields[2].empty()) {
      continue;  // missing value
    }
    const int year = static_cast<int>(parse_int_field(fields[1], "year"));
    if (year < kMinIndicatorYear || year > kMaxIndicatorYear) {
      throw MalformedCsv("year " + fields[1] + " outside plausible indicator range");
    }
    const double value = parse_double_field(fields[2], fields[0] + " " + fields[1]);
    if (!std::isfinite(value)) {
      throw MalformedCsv(fields[0] + " " + fields[1] + ": non-finite value");
    }
    table.rows[{fields[0], year}] = value;
  }
  return table;
}

}  // namespace

std::string_view to_string(TargetName target) {
  switch (target) {
    case TargetName::kRealGdp: return "real_gdp";
    case TargetName::kNominalGdp: return "nominal_gdp";
    case TargetName::kPppGdp: return "ppp_gdp";
    case TargetName::kGdpGrowth: return "gdp_growth";
    case TargetName::kPerCapitaGdpGrowth: return "per_capita_gdp_growth";
  }
  return "?";
}

std::string_view display_name(TargetName target) {
  switch (target) {
    case TargetName::kRealGdp: return "Real GDP";
    case TargetName::kNominalGdp: return "Nominal GDP";
    case TargetName::kPppGdp: return "PPP GDP";
    case TargetName::kGdpGrowth: return "GDP Growth";
    case TargetName::kPerCapitaGdpGrowth: return "Per capita GDP growth";
  }
  return "?";
}

TargetName target_from_string(std::string_view text) {
  for (const TargetName t : kAllTargets) {
    if (to_string(t) == text) return t;
  }
  throw Error("unknown target '" + std::string(text) + "'");
}

std::string_view to_string(FeaturePair pair) {
  return pair == FeaturePair::kLuminosityPopulation ? "luminosity_population"
                                                    : "luminosity_year";
}

FeaturePair feature_pair_from_string(std::string_view text) {
  for (const FeaturePair p : kAllFeaturePairs) {
    if (to_string(p) == text) return p;
  }
  throw Error("unknown feature pair '" + std::string(text) + "'");
}

IndicatorTable parse_worldbank_csv(std::string_view text, Diagnostics* diag) {
  CsvReader reader(text);

  // The header may be preceded by up to 4 metadata records ("Data Source",
  // "Last Updated Date", blanks).
  constexpr int kMaxMetadataRecords = 4;
  for (int skipped = 0; skipped <= kMaxMetadataRecords; ++skipped) {
    auto record = reader.next_record();
    if (!record) {
      break;
    }
    if (looks_like_wide_header(*record)) {
      return parse_wide(reader, *record, diag);
    }
    if (looks_like_long_header(*record)) {
      return parse_long(reader, diag);
    }
  }
  throw MalformedCsv(
      "no recognizable header found (expected World Bank wide format or "
      "region_id,year,value)");
}

std::pair<std::vector<double>, ScalingRange> min_max_scale(std::span<const double> column,
                                                           Diagnostics* diag,
                                                           std::string_view label) {
  if (column.empty()) {
    throw std::invalid_argument("cannot scale an empty column");
  }
  ScalingRange range{column[0], column[0]};
  for (const double v : column) {
    range.min = std::min(range.min, v);
    range.max = std::max(range.max, v);
  }
  std::vector<double> scaled(column.size());
  if (range.max == range.min) {
    warn(diag, "DegenerateColumn: " + std::string(label) +
                   " is constant, scaled values set to 0");
    return {std::move(scaled), range};
  }
  const double span = range.max - range.min;
  for (std::size_t i = 0; i < column.size(); ++i) {
    scaled[i] = (column[i] - range.min) / span;
  }
  return {std::move(scaled), range};
}

ModelDataset build_model_dataset(const std::map<std::string, HarmonizedSeries>& luminosity,
                                 const IndicatorTable& population,
                                 const IndicatorTable& target_table, TargetName target,
                                 FeaturePair feature_pair, Diagnostics* diag) {
  ModelDataset dataset;
  dataset.target = target;
  dataset.feature_pair = feature_pair;

  // Candidate keys come from the luminosity series; both maps iterate in
  // sorted order, so rows are canonically ordered by (region, year) no
  // matter how the inputs were assembled.
  std::vector<double> lum_raw, pop_raw, year_raw, target_raw;
  for (const auto& [region_id, series] : luminosity) {
    for (const auto& [year, lum_value] : series.points) {
      const auto pop = population.value(region_id, year);
      const auto tgt = target_table.value(region_id, year);
      if (!pop || !tgt) {
        ++dataset.dropped_rows;
        continue;
      }
      ModelRow row;
      row.region_id = region_id;
      row.year = year;
      dataset.rows.push_back(std::move(row));
      lum_raw.push_back(lum_value);
      pop_raw.push_back(*pop);
      year_raw.push_back(static_cast<double>(year));
      target_raw.push_back(*tgt);
    }
  }
  if (dataset.rows.empty()) {
    throw EmptyDataset("join of luminosity, population and " +
                       std::string(to_string(target)) + " produced no rows");
  }

  auto [x1, x1_range] = min_max_scale(lum_raw, diag, "luminosity");
  auto [x2, x2_range] = min_max_scale(pop_raw, diag, "population");
  auto [x3, x3_range] = min_max_scale(year_raw, diag, "year");
  auto [y, y_range] = min_max_scale(target_raw, diag, to_string(target));
  dataset.scaling = ScalingParams{x1_range, x2_range, x3_range, y_range};
  for (std::size_t i = 0; i < dataset.rows.size(); ++i) {
    dataset.rows[i].x1 = x1[i];
    dataset.rows[i].x2 = x2[i];
    dataset.rows[i].x3 = x3[i];
    dataset.rows[i].y = y[i];
  }
  return dataset;
}

std::vector<std::string> suggest_country_band(const IndicatorTable& nominal_gdp,
                                              const std::string& reference_region,
                                              int reference_year, double band_factor) {
  if (!(band_factor >= 1.0)) {
    throw std::invalid_argument("band factor must be >= 1");
  }
  const auto reference = nominal_gdp.value(reference_region, reference_year);
  if (!reference || !(*reference > 0.0)) {
    throw Error("no positive nominal GDP for reference " + reference_region + " in " +
                std::to_string(reference_year));
  }
  const double lo = *reference / band_factor;
  const double hi = *reference * band_factor;
  std::vector<std::string> out;
  for (const auto& [key, value] : nominal_gdp.rows) {
    if (key.second == reference_year && value >= lo && value <= hi) {
      out.push_back(key.first);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string dataset_to_csv(const ModelDataset& dataset) {
  std::string out = "region_id,year,x1,x2,x3,y\n";
  for (const ModelRow& row : dataset.rows) {
    out += csv_escape(row.region_id);
    out.push_back(',');
    out += std::to_string(row.year);
    out.push_back(',');
    append_double(out, row.x1);
    out.push_back(',');
    append_double(out, row.x2);
    out.push_back(',');
    append_double(out, row.x3);
    out.push_back(',');
    append_double(out, row.y);
    out.push_back('\n');
  }
  return out;
}

std::string scaling_to_json(const ScalingParams& scaling) {
  const auto range_json = [](const ScalingRange& r) {
    return "{\"min\": " + double_to_string(r.min) + ", \"max\": " + double_to_string(r.max) +
           "}";
  };
  return "{\n  \"x1\": " + range_json(scaling.x1) + ",\n  \"x2\": " + range_json(scaling.x2) +
         ",\n  \"x3\": " + range_json(scaling.x3) + ",\n  \"y\": " + range_json(scaling.y) +
         "\n}\n";
}

}  // namespace nightlights
