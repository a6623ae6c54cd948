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

#include "nightlights/regress.hpp"

#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "support/oracles.hpp"

using namespace nightlights;
using nightlights::testing::make_rng;

namespace {

std::vector<FittingRow> planted_rows(std::mt19937_64& rng, std::size_t n,
                                     const std::array<double, 5>& coefficients,
                                     double intercept) {
  std::uniform_real_distribution<double> x(0.0, 1.0);
  std::vector<FittingRow> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const FeatureVector z = expand_features(x(rng), x(rng));
    double y = intercept;
    for (std::size_t k = 0; k < 5; ++k) {
      y += coefficients[k] * z[k];
    }
    rows.push_back(FittingRow{z, y});
  }
  return rows;
}

}  // namespace

TEST_SUITE_BEGIN("regress");

TEST_CASE("feature expansion") {
  const auto check_equal = [](const FeatureVector& z, std::array<double, 5> want) {
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(z[i] == want[i]);
    }
  };
  check_equal(expand_features(0, 0), {0, 0, 0, 0, 0});
  check_equal(expand_features(1, 1), {1, 1, 1, 1, 1});
  check_equal(expand_features(2, 3), {2, 3, 6, 4, 9});
  CHECK_THROWS_AS((void)expand_features(std::numeric_limits<double>::infinity(), 1.0),
                  NonFinite);
  CHECK_THROWS_AS((void)expand_features(0.0, std::nan("")), NonFinite);
}

TEST_CASE("a planted single-term model is recovered") {
  auto rng = make_rng(70);
  std::uniform_real_distribution<double> x(0.0, 1.0);
  std::vector<FittingRow> rows;
  for (int i = 0; i < 40; ++i) {
    const double x1 = x(rng);
    const double x2 = x(rng);
    rows.push_back(FittingRow{expand_features(x1, x2), 2.0 * x1});
  }
  const RegressionFit fit = fit_least_squares(rows);
  CHECK(fit.coefficients[0] == doctest::Approx(2.0).epsilon(1e-8));
  for (std::size_t k = 1; k < 5; ++k) {
    CHECK(std::abs(fit.coefficients[k]) < 1e-8);
  }
  CHECK(std::abs(fit.intercept) < 1e-8);
  CHECK(fit.r_squared >= 1.0 - 1e-12);
  CHECK(fit.n_rows == 40);
}

TEST_CASE("100 random planted models are recovered to 1e-8") {
  auto rng = make_rng(71);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::array<double, 5> planted{};
    for (double& c : planted) c = coef(rng);
    const double intercept = coef(rng);
    const auto rows = planted_rows(rng, 50 + trial % 40, planted, intercept);

    const RegressionFit fit = fit_least_squares(rows);
    for (std::size_t k = 0; k < 5; ++k) {
      REQUIRE(fit.coefficients[k] == doctest::Approx(planted[k]).epsilon(1e-8));
    }
    REQUIRE(fit.intercept == doctest::Approx(intercept).epsilon(1e-8));
    REQUIRE(fit.r_squared >= 1.0 - 1e-12);
  }
}

TEST_CASE("identical x1 everywhere is rank deficient, with columns named") {
  auto rng = make_rng(72);
  std::uniform_real_distribution<double> x(0.0, 1.0);
  std::vector<FittingRow> rows;
  for (int i = 0; i < 30; ++i) {
    rows.push_back(FittingRow{expand_features(0.7, x(rng)), x(rng)});
  }
  try {
    (void)fit_least_squares(rows);
    FAIL("expected RankDeficient");
  } catch (const RankDeficient& e) {
    CHECK(e.dependent_columns().size() == 3);
    CHECK(std::string(e.what()).find("dependent") != std::string::npos);
  }
}

TEST_CASE("too few rows") {
  auto rng = make_rng(73);
  const auto rows = planted_rows(rng, 5, {1, 0, 0, 0, 0}, 0.0);
  CHECK_THROWS_AS((void)fit_least_squares(rows), TooFewRows);
}

TEST_CASE("r_squared") {
  SUBCASE("perfect prediction gives 1") {
    const double y[] = {1.0, 2.0, 3.0};
    CHECK(r_squared(y, y) == 1.0);
  }
  SUBCASE("predicting the mean gives 0") {
    const double y[] = {1.0, 2.0, 3.0};
    const double y_hat[] = {2.0, 2.0, 2.0};
    CHECK(r_squared(y, y_hat) == 0.0);
  }
  SUBCASE("constant target is an error") {
    const double y[] = {2.0, 2.0, 2.0};
    const double y_hat[] = {1.0, 2.0, 3.0};
    CHECK_THROWS_AS((void)r_squared(y, y_hat), ConstantTarget);
  }
  SUBCASE("matches direct recomputation on random pairs") {
    auto rng = make_rng(74);
    std::uniform_real_distribution<double> v(-10.0, 10.0);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> y(20), y_hat(20);
      for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = v(rng);
        y_hat[i] = v(rng);
      }
      long double mean = 0.0L;
      for (const double value : y) mean += value;
      mean /= y.size();
      long double ss_tot = 0.0L, ss_res = 0.0L;
      for (std::size_t i = 0; i < y.size(); ++i) {
        ss_tot += (y[i] - mean) * (y[i] - mean);
        ss_res += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
      }
      const double expected = static_cast<double>(1.0L - ss_res / ss_tot);
      CHECK(r_squared(y, y_hat) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("residuals are orthogonal to every design column") {
  auto rng = make_rng(75);
  std::uniform_real_distribution<double> x(0.0, 1.0);
  std::uniform_real_distribution<double> noise(-0.5, 0.5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<FittingRow> rows;
    for (int i = 0; i < 80; ++i) {
      const FeatureVector z = expand_features(x(rng), x(rng));
      rows.push_back(FittingRow{z, 2.0 * z[0] - z[4] + 0.3 + noise(rng)});
    }
    const RegressionFit fit = fit_least_squares(rows);

    double y_norm = 0.0;
    for (const FittingRow& row : rows) y_norm += row.target * row.target;
    y_norm = std::sqrt(y_norm);

    for (std::size_t col = 0; col < 6; ++col) {
      double dot = 0.0;
      for (const FittingRow& row : rows) {
        double predicted = fit.intercept;
        for (std::size_t k = 0; k < 5; ++k) predicted += fit.coefficients[k] * row.features[k];
        const double residual = row.target - predicted;
        const double column = col < 5 ? row.features[col] : 1.0;
        dot += residual * column;
      }
      REQUIRE(std::abs(dot) <= 1e-8 * y_norm);
    }
  }
}

TEST_CASE("duplicating every row leaves the coefficients unchanged") {
  auto rng = make_rng(76);
  std::uniform_real_distribution<double> x(0.0, 1.0);
  std::uniform_real_distribution<double> noise(-1.0, 1.0);
  std::vector<FittingRow> rows;
  for (int i = 0; i < 50; ++i) {
    const FeatureVector z = expand_features(x(rng), x(rng));
    rows.push_back(FittingRow{z, z[0] + 0.5 * z[3] + noise(rng)});
  }
  std::vector<FittingRow> doubled = rows;
  doubled.insert(doubled.end(), rows.begin(), rows.end());

  const RegressionFit a = fit_least_squares(rows);
  const RegressionFit b = fit_least_squares(doubled);
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(std::abs(a.coefficients[k] - b.coefficients[k]) <= 1e-10);
  }
  CHECK(std::abs(a.intercept - b.intercept) <= 1e-10);
}

TEST_CASE("r_squared is invariant under affine rescaling of the target") {
  auto rng = make_rng(77);
  std::uniform_real_distribution<double> x(0.0, 1.0);
  std::uniform_real_distribution<double> noise(-1.0, 1.0);
  std::vector<FittingRow> rows;
  for (int i = 0; i < 60; ++i) {
    const FeatureVector z = expand_features(x(rng), x(rng));
    rows.push_back(FittingRow{z, 3.0 * z[1] - z[2] + noise(rng)});
  }
  const RegressionFit base = fit_least_squares(rows);

  std::vector<FittingRow> rescaled = rows;
  for (FittingRow& row : rescaled) {
    row.target = 7.5 * row.target - 1234.0;
  }
  const RegressionFit scaled = fit_least_squares(rescaled);
  CHECK(scaled.r_squared == doctest::Approx(base.r_squared).epsilon(1e-12));
}

TEST_CASE("fits are deterministic") {
  auto rng = make_rng(78);
  std::uniform_real_distribution<double> x(0.0, 1.0);
  std::vector<FittingRow> rows;
  for (int i = 0; i < 64; ++i) {
    const FeatureVector z = expand_features(x(rng), x(rng));
    rows.push_back(FittingRow{z, z[0] * 1.5 - z[4] * 0.25 + 0.125});
  }
  const RegressionFit a = fit_least_squares(rows);
  const RegressionFit b = fit_least_squares(rows);
  CHECK(a.coefficients == b.coefficients);
  CHECK(a.intercept == b.intercept);
  CHECK(a.r_squared == b.r_squared);
}

TEST_CASE("target ranking by r_squared is stable across feature scalings") {
  auto rng = make_rng(79);
  std::uniform_real_distribution<double> x_raw(50.0, 900.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  const std::size_t n = 120;
  std::vector<double> x1(n), x2(n);
  for (std::size_t i = 0; i < n; ++i) {
    x1[i] = x_raw(rng);
    x2[i] = x_raw(rng) * 3.0;
  }
  // Five targets with increasing noise, so their R^2 ranking is unambiguous.
  const double sigmas[5] = {0.1, 0.4, 1.0, 4.0, 12.0};
  std::vector<std::vector<double>> targets(5, std::vector<double>(n));
  for (std::size_t t = 0; t < 5; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const double base = 0.002 * x1[i] + 0.001 * x2[i] + 1e-6 * x1[i] * x2[i];
      targets[t][i] = base + sigmas[t] * noise(rng);
    }
  }

  const auto rank_with = [&](bool z_score) {
    const auto scale = [&](const std::vector<double>& column) {
      std::vector<double> out(column.size());
      if (z_score) {
        double mean = 0.0;
        for (const double v : column) mean += v;
        mean /= column.size();
        double var = 0.0;
        for (const double v : column) var += (v - mean) * (v - mean);
        const double sd = std::sqrt(var / column.size());
        for (std::size_t i = 0; i < column.size(); ++i) out[i] = (column[i] - mean) / sd;
      } else {
        const double lo = *std::min_element(column.begin(), column.end());
        const double hi = *std::max_element(column.begin(), column.end());
        for (std::size_t i = 0; i < column.size(); ++i) out[i] = (column[i] - lo) / (hi - lo);
      }
      return out;
    };
    const std::vector<double> s1 = scale(x1);
    const std::vector<double> s2 = scale(x2);

    std::vector<std::size_t> order(5);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> r2(5);
    for (std::size_t t = 0; t < 5; ++t) {
      const std::vector<double> sy = scale(targets[t]);
      std::vector<FittingRow> rows;
      for (std::size_t i = 0; i < n; ++i) {
        rows.push_back(FittingRow{expand_features(s1[i], s2[i]), sy[i]});
      }
      r2[t] = fit_least_squares(rows).r_squared;
    }
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return r2[a] > r2[b]; });
    return order;
  };

  CHECK(rank_with(false) == rank_with(true));
}

TEST_CASE("run_analysis renders error cells without aborting") {
  // One healthy dataset and one degenerate (constant x1) dataset.
  ModelDataset good;
  good.target = TargetName::kRealGdp;
  good.feature_pair = FeaturePair::kLuminosityPopulation;
  ModelDataset bad;
  bad.target = TargetName::kNominalGdp;
  bad.feature_pair = FeaturePair::kLuminosityPopulation;

  auto rng = make_rng(80);
  std::uniform_real_distribution<double> x(0.0, 1.0);
  for (int i = 0; i < 30; ++i) {
    ModelRow row;
    row.region_id = "TST";
    row.year = 1992 + i;
    row.x1 = x(rng);
    row.x2 = x(rng);
    row.x3 = i / 30.0;
    row.y = 0.5 * row.x1 + 0.1;
    good.rows.push_back(row);
    row.x1 = 0.5;  // constant: x1, x1^2, x1*x2 collapse
    bad.rows.push_back(row);
  }

  const ModelDataset datasets[] = {good, bad};
  const AnalysisReport report = run_analysis(datasets);
  REQUIRE(report.cells.size() == 2);
  CHECK(report.cells[0].ok);
  CHECK_FALSE(report.cells[1].ok);
  CHECK(report.cells[1].error.find("rank") != std::string::npos);

  const std::string csv = report_to_csv(report);
  CHECK(csv.rfind("target,feature_pair,a_x1,a_x2,a_x1sq,a_x1x2,a_x2sq,intercept,r2,n\n", 0) ==
        0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

  const std::string markdown = report_to_markdown(report);
  CHECK(markdown.find("| Real GDP") != std::string::npos);
  CHECK(markdown.find("error:") != std::string::npos);
}

TEST_CASE("report coefficient columns follow the published order") {
  // One exact row set with distinct coefficients pins the column mapping:
  // the model's a3 (x1*x2) and a4 (x1^2) swap places in the report.
  auto rng = make_rng(81);
  const std::array<double, 5> planted = {0.5, -1.5, 2.5, -3.5, 1.25};
  const auto rows = planted_rows(rng, 60, planted, 0.75);
  RegressionFit fit = fit_least_squares(rows);
  fit.target = TargetName::kPppGdp;
  fit.feature_pair = FeaturePair::kLuminosityYear;

  AnalysisReport report;
  report.cells.push_back({TargetName::kPppGdp, FeaturePair::kLuminosityYear, true, fit, ""});
  const std::string csv = report_to_csv(report);
  const std::string row = csv.substr(csv.find('\n') + 1);

  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = row.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(row.substr(start, row.find('\n') - start));
      break;
    }
    fields.push_back(row.substr(start, comma - start));
    start = comma + 1;
  }
  REQUIRE(fields.size() == 10);
  CHECK(std::stod(fields[2]) == doctest::Approx(planted[0]).epsilon(1e-6));  // a_x1
  CHECK(std::stod(fields[3]) == doctest::Approx(planted[1]).epsilon(1e-6));  // a_x2
  CHECK(std::stod(fields[4]) == doctest::Approx(planted[3]).epsilon(1e-6));  // a_x1sq
  CHECK(std::stod(fields[5]) == doctest::Approx(planted[2]).epsilon(1e-6));  // a_x1x2
  CHECK(std::stod(fields[6]) == doctest::Approx(planted[4]).epsilon(1e-6));  // a_x2sq
}

TEST_SUITE_END();
