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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace nightlights {

namespace {

const char* kColumnLabels[6] = {"x1", "x2", "x1*x2", "x1^2", "x2^2", "intercept"};

// Dense column-major matrix just big enough for the 6-column designs here.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // column-major

  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& at(std::size_t r, std::size_t c) { return data[c * rows + r]; }
  double at(std::size_t r, std::size_t c) const { return data[c * rows + r]; }
};

}  // namespace

FeatureVector expand_features(double x1, double x2) {
  if (!std::isfinite(x1) || !std::isfinite(x2)) {
    throw NonFinite("feature inputs must be finite");
  }
  return FeatureVector{x1, x2, x1 * x2, x1 * x1, x2 * x2};
}

double RegressionFit::predict(double x1, double x2) const {
  const FeatureVector z = expand_features(x1, x2);
  double y = intercept;
  for (std::size_t i = 0; i < 5; ++i) {
    y += coefficients[i] * z[i];
  }
  return y;
}

RegressionFit fit_least_squares(std::span<const FittingRow> rows, bool with_intercept) {
  const std::size_t n = rows.size();
  const std::size_t p = with_intercept ? 6 : 5;
  if (n < 6) {
    throw TooFewRows("need at least 6 rows, got " + std::to_string(n));
  }

  Matrix a(n, p);
  std::vector<double> b(n);
  for (std::size_t r = 0; r < n; ++r) {
    const FeatureVector& z = rows[r].features;
    for (std::size_t c = 0; c < 5; ++c) {
      if (!std::isfinite(z[c])) {
        throw NonFinite("non-finite feature in row " + std::to_string(r));
      }
      a.at(r, c) = z[c];
    }
    if (with_intercept) {
      a.at(r, 5) = 1.0;
    }
    if (!std::isfinite(rows[r].target)) {
      throw NonFinite("non-finite target in row " + std::to_string(r));
    }
    b[r] = rows[r].target;
  }

  // Householder QR with column pivoting. Column norms are recomputed at each
  // step; with at most 6 columns the extra passes are cheaper than keeping
  // downdated norms trustworthy.
  std::vector<std::size_t> pivot(p);
  std::iota(pivot.begin(), pivot.end(), 0);
  std::vector<double> beta(p, 0.0);  // Householder scalars
  double r00 = 0.0;

  for (std::size_t k = 0; k < p; ++k) {
    std::size_t best = k;
    double best_norm2 = -1.0;
    for (std::size_t c = k; c < p; ++c) {
      double norm2 = 0.0;
      for (std::size_t r = k; r < n; ++r) {
        norm2 += a.at(r, c) * a.at(r, c);
      }
      if (norm2 > best_norm2) {
        best_norm2 = norm2;
        best = c;
      }
    }
    if (best != k) {
      for (std::size_t r = 0; r < n; ++r) {
        std::swap(a.at(r, k), a.at(r, best));
      }
      std::swap(pivot[k], pivot[best]);
    }

    // Householder vector for column k, stored below the diagonal.
    double norm = std::sqrt(best_norm2);
    if (a.at(k, k) > 0.0) {
      norm = -norm;
    }
    if (k == 0) {
      r00 = std::abs(norm);
    }
    const double tol =
        std::numeric_limits<double>::epsilon() * static_cast<double>(std::max(n, p)) * r00;
    if (std::abs(norm) <= tol) {
      // Remaining columns are numerically dependent on the accepted ones.
      std::vector<std::string> dependent;
      for (std::size_t c = k; c < p; ++c) {
        dependent.emplace_back(kColumnLabels[pivot[c]]);
      }
      std::string what = "design matrix is rank deficient; dependent columns:";
      for (const auto& name : dependent) {
        what += " " + name;
      }
      throw RankDeficient(what, std::move(dependent));
    }

    const double alpha = norm;
    a.at(k, k) -= alpha;  // v_k = x - alpha*e1, stored in place
    double vtv = 0.0;
    for (std::size_t r = k; r < n; ++r) {
      vtv += a.at(r, k) * a.at(r, k);
    }
    beta[k] = 2.0 / vtv;

    // Apply the reflector to the remaining columns and to b.
    for (std::size_t c = k + 1; c < p; ++c) {
      double dot = 0.0;
      for (std::size_t r = k; r < n; ++r) {
        dot += a.at(r, k) * a.at(r, c);
      }
      const double scale = beta[k] * dot;
      for (std::size_t r = k; r < n; ++r) {
        a.at(r, c) -= scale * a.at(r, k);
      }
    }
    double dot_b = 0.0;
    for (std::size_t r = k; r < n; ++r) {
      dot_b += a.at(r, k) * b[r];
    }
    const double scale_b = beta[k] * dot_b;
    for (std::size_t r = k; r < n; ++r) {
      b[r] -= scale_b * a.at(r, k);
    }

    a.at(k, k) = alpha;  // restore R's diagonal
  }

  // Back substitution: R (P^T x) = Q^T b.
  std::vector<double> solution(p, 0.0);
  for (std::size_t k = p; k-- > 0;) {
    double v = b[k];
    for (std::size_t c = k + 1; c < p; ++c) {
      v -= a.at(k, c) * solution[c];
    }
    solution[k] = v / a.at(k, k);
  }

  RegressionFit fit;
  fit.n_rows = n;
  std::vector<double> coef(p, 0.0);
  for (std::size_t k = 0; k < p; ++k) {
    coef[pivot[k]] = solution[k];
  }
  for (std::size_t i = 0; i < 5; ++i) {
    fit.coefficients[i] = coef[i];
  }
  fit.intercept = with_intercept ? coef[5] : 0.0;

  std::vector<double> y(n), y_hat(n);
  for (std::size_t r = 0; r < n; ++r) {
    const FeatureVector& z = rows[r].features;
    double v = fit.intercept;
    for (std::size_t i = 0; i < 5; ++i) {
      v += fit.coefficients[i] * z[i];
    }
    y[r] = rows[r].target;
    y_hat[r] = v;
  }
  fit.r_squared = r_squared(y, y_hat);
  return fit;
}

double r_squared(std::span<const double> y, std::span<const double> y_hat) {
  if (y.size() != y_hat.size() || y.size() < 2) {
    throw std::invalid_argument("r_squared needs two equally sized sequences of length >= 2");
  }
  double mean = 0.0;
  for (const double v : y) {
    mean += v;
  }
  mean /= static_cast<double>(y.size());

  double ss_tot = 0.0;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_tot += (y[i] - mean) * (y[i] - mean);
    ss_res += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
  }
  if (ss_tot == 0.0) {
    throw ConstantTarget("target has zero variance");
  }
  return 1.0 - ss_res / ss_tot;
}

AnalysisReport run_analysis(std::span<const ModelDataset> datasets) {
  AnalysisReport report;
  report.cells.reserve(datasets.size());
  for (const ModelDataset& dataset : datasets) {
    AnalysisReport::Cell cell;
    cell.target = dataset.target;
    cell.feature_pair = dataset.feature_pair;
    try {
      std::vector<FittingRow> rows;
      rows.reserve(dataset.rows.size());
      for (const ModelRow& row : dataset.rows) {
        const double x2 = dataset.feature_pair == FeaturePair::kLuminosityPopulation
                              ? row.x2
                              : row.x3;
        rows.push_back(FittingRow{expand_features(row.x1, x2), row.y});
      }
      cell.fit = fit_least_squares(rows);
      cell.fit.target = dataset.target;
      cell.fit.feature_pair = dataset.feature_pair;
      cell.ok = true;
    } catch (const Error& e) {
      cell.error = e.what();
    }
    report.cells.push_back(std::move(cell));
  }
  return report;
}

std::string report_to_csv(const AnalysisReport& report) {
  std::string out = "target,feature_pair,a_x1,a_x2,a_x1sq,a_x1x2,a_x2sq,intercept,r2,n\n";
  for (const auto& cell : report.cells) {
    out += to_string(cell.target);
    out.push_back(',');
    out += to_string(cell.feature_pair);
    if (cell.ok) {
      // Published column order: x1, x2, x1^2, x1*x2, x2^2. The model stores
      // a3 = x1*x2 and a4 = x1^2, so those two swap places here.
      const std::array<double, 5> published = {
          cell.fit.coefficients[0], cell.fit.coefficients[1], cell.fit.coefficients[3],
          cell.fit.coefficients[2], cell.fit.coefficients[4]};
      for (const double c : published) {
        out.push_back(',');
        append_double(out, c);
      }
      out.push_back(',');
      append_double(out, cell.fit.intercept);
      out.push_back(',');
      append_double(out, cell.fit.r_squared);
      out.push_back(',');
      out += std::to_string(cell.fit.n_rows);
    } else {
      out += ",,,,,,,,0";
    }
    out.push_back('\n');
  }
  return out;
}

std::string report_to_markdown(const AnalysisReport& report) {
  std::string out;
  for (const FeaturePair pair : kAllFeaturePairs) {
    const bool with_population = pair == FeaturePair::kLuminosityPopulation;
    const std::string x2_label = with_population ? "x2" : "x3";
    out += with_population ? "## Polynomial regression with Luminosity and Population\n\n"
                           : "## Polynomial regression with Luminosity and Year\n\n";
    out += "| Y | x1 | " + x2_label + " | x1^2 | x1*" + x2_label + " | " + x2_label +
           "^2 | Intercept | R^2 |\n";
    out += "|---|----|----|------|-------|------|-----------|-----|\n";
    for (const auto& cell : report.cells) {
      if (cell.feature_pair != pair) {
        continue;
      }
      out += "| ";
      out += display_name(cell.target);
      if (cell.ok) {
        const std::array<double, 5> published = {
            cell.fit.coefficients[0], cell.fit.coefficients[1], cell.fit.coefficients[3],
            cell.fit.coefficients[2], cell.fit.coefficients[4]};
        for (const double c : published) {
          out += " | ";
          append_double(out, c);
        }
        out += " | ";
        append_double(out, cell.fit.intercept);
        out += " | ";
        append_double(out, cell.fit.r_squared);
        out += " |\n";
      } else {
        for (int i = 0; i < 6; ++i) {
          out += " | -";
        }
        out += " | error: " + cell.error + " |\n";
      }
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace nightlights
