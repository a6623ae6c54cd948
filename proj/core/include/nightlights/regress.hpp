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

#ifndef NIGHTLIGHTS_REGRESS_HPP
#define NIGHTLIGHTS_REGRESS_HPP

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nightlights/dataset.hpp"
#include "nightlights/errors.hpp"

namespace nightlights {

NIGHTLIGHTS_DEFINE_ERROR(NonFinite);
NIGHTLIGHTS_DEFINE_ERROR(TooFewRows);
NIGHTLIGHTS_DEFINE_ERROR(ConstantTarget);

/// Raised when the design matrix loses rank; names the dependent columns.
class RankDeficient : public Error {
public:
  RankDeficient(const std::string& what, std::vector<std::string> columns)
      : Error(what), columns_(std::move(columns)) {}
  const std::vector<std::string>& dependent_columns() const { return columns_; }

private:
  std::vector<std::string> columns_;
};

/// Degree-2 monomial expansion of the two regressors, in the model's order:
/// z1 = x1, z2 = x2, z3 = x1*x2, z4 = x1^2, z5 = x2^2. Report columns are
/// labeled in the published order (x1, x2, x1^2, x1*x2, x2^2) at render
/// time; the math never reorders.
struct FeatureVector {
  double z1 = 0.0;
  double z2 = 0.0;
  double z3 = 0.0;
  double z4 = 0.0;
  double z5 = 0.0;

  double operator[](std::size_t i) const {
    switch (i) {
      case 0: return z1;
      case 1: return z2;
      case 2: return z3;
      case 3: return z4;
      default: return z5;
    }
  }
};

/// Throws NonFinite on non-finite input.
FeatureVector expand_features(double x1, double x2);

struct FittingRow {
  FeatureVector features;
  double target = 0.0;
};

/// Least-squares fit of y = a1*z1 + ... + a5*z5 (+ intercept).
struct RegressionFit {
  std::array<double, 5> coefficients{};  ///< a1..a5 over (x1, x2, x1*x2, x1^2, x2^2)
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t n_rows = 0;
  TargetName target = TargetName::kRealGdp;
  FeaturePair feature_pair = FeaturePair::kLuminosityPopulation;

  double predict(double x1, double x2) const;
};

/// Minimizes the sum of squared residuals via Householder QR with column
/// pivoting; the normal equations are never formed, so the squared-monomial
/// design stays well behaved. Deterministic: same rows, same bits.
/// Throws TooFewRows (n < 6) and RankDeficient (dependent columns named).
RegressionFit fit_least_squares(std::span<const FittingRow> rows, bool with_intercept = true);

/// 1 - SS_res/SS_tot with SS_tot centered on mean(y). Throws ConstantTarget
/// when y has zero variance.
double r_squared(std::span<const double> y, std::span<const double> y_hat);

/// One fit per dataset; a failed fit becomes an error cell instead of
/// aborting the remaining fits.
struct AnalysisReport {
  struct Cell {
    TargetName target = TargetName::kRealGdp;
    FeaturePair feature_pair = FeaturePair::kLuminosityPopulation;
    bool ok = false;
    RegressionFit fit;
    std::string error;
  };
  std::vector<Cell> cells;
};

AnalysisReport run_analysis(std::span<const ModelDataset> datasets);

/// CSV with columns target,feature_pair,a_x1,a_x2,a_x1sq,a_x1x2,a_x2sq,
/// intercept,r2,n. Coefficients appear under the published column order.
std::string report_to_csv(const AnalysisReport& report);

/// Two markdown tables (one per feature pair), five target rows each, with
/// Coefficients / Intercept / R^2 columns.
std::string report_to_markdown(const AnalysisReport& report);

}  // namespace nightlights

#endif  // NIGHTLIGHTS_REGRESS_HPP
