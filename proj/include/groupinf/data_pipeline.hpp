#pragma once

#include "groupinf/csv.hpp"
#include "groupinf/projections.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace groupinf {

struct LoadOptions {
  std::string response;
  std::vector<std::string> predictors;  // empty: every other column
  bool log_response = false;
};

struct Dataset {
  std::vector<std::string> predictor_names;
  std::string response_name;
  Matrix X;  // rows kept x predictors, raw values
  Vector y;  // log-transformed if requested
  int rows_read = 0;
  int rows_dropped = 0;
};

/// Rows with a missing value in the response or any used predictor are
/// dropped and counted. Throws ParseError on a non-numeric value (with its
/// location) or a non-positive response under the log transform, and
/// ConfigError on unknown column names.
Dataset load_dataset(const CsvTable& table, const LoadOptions& opts);
Dataset load_csv(const std::string& path, const LoadOptions& opts, char delimiter = ',');

/// Columns to mean 0 and sample standard deviation 1. Throws ConfigError
/// on a constant column.
Matrix standardize(const Matrix& X, const std::vector<std::string>& names = {});

/// (x, (3x^2 - 1) / 2, (5x^3 - 3x) / 2).
std::array<double, 3> legendre_terms(double x);

/// Standardizes the predictors (unless `standardize_first` is false), expands
/// each into `degree` (1 or 3) Legendre columns forming one group, then
/// centers every column and scales it to unit norm. The applied scale factors
/// are kept in design.scaling().
GroupedDesign legendre_expand(const Dataset& data, int degree, bool standardize_first = true);

struct SigmaEstimate {
  double value = 0.0;
  bool estimated = false;
  Index df = 0;
};

/// sqrt(RSS / (n - rank([1, X]))) from the least-squares fit with intercept.
/// Throws ConfigError("sigma") when n <= rank.
SigmaEstimate estimate_sigma(const GroupedDesign& design, const Vector& y);

struct AnalysisConfig {
  bool run_fs = true;
  bool run_iht = true;
  bool run_glasso = true;
  int target = 8;           // groups to select
  double alpha = 0.1;
  std::optional<double> sigma;
  int iht_T = 5;
  double iht_eta = 2.0;
  std::optional<double> glasso_lambda;  // default: bisection on the active-set size
  int B = 20000;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct ReportRow {
  std::string selector;
  int rank = 0;
  int group = -1;
  std::string group_name;
  double p_value = 0.0;
  std::optional<double> p_value_sequential;
  double lower_bound = 0.0;
  // Set when inference for the row could not be completed; p_value and
  // lower_bound are then NaN.
  std::string note;
};

struct AnalysisReport {
  std::vector<ReportRow> rows;
  SigmaEstimate sigma;
  std::optional<double> glasso_lambda;
  Index n = 0;
  Index p = 0;
  int groups = 0;
  double alpha = 0.1;
};

/// Centers y, then runs each enabled selector with `target` groups and
/// reports selective p-values and lower bounds. FS rows keep selection order
/// and carry sequential p-values; the other selectors are sorted by p. A group
/// lasso row whose importance sample degenerates is kept, with a note and NaN
/// values, instead of aborting the report.
AnalysisReport analyze(const GroupedDesign& design, const Vector& y, const AnalysisConfig& config);

void write_report_table(std::ostream& os, const AnalysisReport& report);
void write_report_csv(std::ostream& os, const AnalysisReport& report);

}  // namespace groupinf
