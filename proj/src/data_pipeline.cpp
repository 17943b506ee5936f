#include "groupinf/data_pipeline.hpp"

#include "groupinf/errors.hpp"
#include "groupinf/forward_stepwise.hpp"
#include "groupinf/group_lasso.hpp"
#include "groupinf/iht.hpp"
#include "groupinf/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace groupinf {

Dataset load_dataset(const CsvTable& table, const LoadOptions& opts) {
  auto find_column = [&](const std::string& name, const char* option) {
    auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) throw ConfigError(option, "no column named '" + name + "'");
    return static_cast<std::size_t>(it - table.header.begin());
  };
  if (opts.response.empty()) throw ConfigError("response", "a response column is required");
  const std::size_t yc = find_column(opts.response, "response");

  std::vector<std::size_t> pcols;
  Dataset data;
  data.response_name = opts.response;
  if (opts.predictors.empty()) {
    for (std::size_t j = 0; j < table.header.size(); ++j) {
      if (j == yc) continue;
      pcols.push_back(j);
      data.predictor_names.push_back(table.header[j]);
    }
  } else {
    for (const auto& name : opts.predictors) {
      const std::size_t j = find_column(name, "predictors");
      if (j == yc) throw ConfigError("predictors", "the response cannot also be a predictor");
      pcols.push_back(j);
      data.predictor_names.push_back(name);
    }
  }
  if (pcols.empty()) throw ConfigError("predictors", "at least one predictor is required");

  std::vector<double> yv;
  std::vector<std::vector<double>> xv;
  data.rows_read = static_cast<int>(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const int line = table.row_lines.empty() ? static_cast<int>(i) + 2 : table.row_lines[i];
    auto value = [&](std::size_t j, double& out) {
      if (is_missing(row[j])) return false;
      if (!parse_number(row[j], out)) {
        throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(j + 1) +
                         " ('" + table.header[j] + "'): non-numeric value '" + row[j] + "'");
      }
      return true;
    };
    double y = 0.0;
    bool complete = value(yc, y);
    std::vector<double> x(pcols.size());
    for (std::size_t k = 0; k < pcols.size(); ++k) {
      if (!value(pcols[k], x[k])) complete = false;
    }
    if (!complete) {
      ++data.rows_dropped;
      continue;
    }
    if (opts.log_response) {
      if (!(y > 0.0)) {
        throw ParseError("line " + std::to_string(line) + ": response " + row[yc] +
                         " is not positive; cannot take its logarithm");
      }
      y = std::log(y);
    }
    yv.push_back(y);
    xv.push_back(std::move(x));
  }

  const Index n = static_cast<Index>(yv.size());
  data.y = Eigen::Map<const Vector>(yv.data(), n);
  data.X.resize(n, static_cast<Index>(pcols.size()));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < data.X.cols(); ++j) data.X(i, j) = xv[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return data;
}

Dataset load_csv(const std::string& path, const LoadOptions& opts, char delimiter) {
  return load_dataset(read_csv_file(path, delimiter), opts);
}

Matrix standardize(const Matrix& X, const std::vector<std::string>& names) {
  if (X.rows() < 2) throw ConfigError("input", "need at least two complete rows");
  Matrix Z = X.rowwise() - X.colwise().mean();
  for (Index j = 0; j < Z.cols(); ++j) {
    const double sd = std::sqrt(Z.col(j).squaredNorm() / static_cast<double>(Z.rows() - 1));
    if (!(sd > 0.0)) {
      const std::string name =
          static_cast<std::size_t>(j) < names.size() ? names[static_cast<std::size_t>(j)] : std::to_string(j);
      throw ConfigError("predictors", "predictor '" + name + "' is constant");
    }
    Z.col(j) /= sd;
  }
  return Z;
}

std::array<double, 3> legendre_terms(double x) {
  return {x, 0.5 * (3.0 * x * x - 1.0), 0.5 * (5.0 * x * x * x - 3.0 * x)};
}

GroupedDesign legendre_expand(const Dataset& data, int degree, bool standardize_first) {
  if (degree != 1 && degree != 3) throw ConfigError("degree", "degree must be 1 or 3");
  const Matrix Z = standardize_first ? standardize(data.X, data.predictor_names) : data.X;
  const Index n = Z.rows();
  const Index m = Z.cols();
  Matrix X(n, m * degree);
  std::vector<std::vector<Index>> groups;
  for (Index j = 0; j < m; ++j) {
    std::vector<Index> cols;
    for (Index i = 0; i < n; ++i) {
      const auto t = legendre_terms(Z(i, j));
      for (int d = 0; d < degree; ++d) X(i, j * degree + d) = t[static_cast<std::size_t>(d)];
    }
    for (int d = 0; d < degree; ++d) cols.push_back(j * degree + d);
    groups.push_back(std::move(cols));
  }

  X.rowwise() -= X.colwise().mean();
  Vector scaling(X.cols());
  for (Index c = 0; c < X.cols(); ++c) {
    const double norm = X.col(c).norm();
    if (!(norm > 0.0)) {
      throw ConfigError("predictors", "expanded column " + std::to_string(c) + " of predictor '" +
                                          data.predictor_names[static_cast<std::size_t>(c / degree)] +
                                          "' is constant");
    }
    X.col(c) /= norm;
    scaling(c) = 1.0 / norm;
  }
  return GroupedDesign(std::move(X), std::move(groups), data.predictor_names, std::move(scaling));
}

SigmaEstimate estimate_sigma(const GroupedDesign& design, const Vector& y) {
  const Index n = design.n();
  Matrix A(n, design.p() + 1);
  A.col(0).setOnes();
  A.rightCols(design.p()) = design.X();
  Eigen::ColPivHouseholderQR<Matrix> qr(A);
  const Index rank = qr.rank();
  if (n <= rank) {
    throw ConfigError("sigma", "cannot estimate sigma with n = " + std::to_string(n) +
                                   " <= rank " + std::to_string(rank) + "; pass --sigma");
  }
  const Vector fitted = A * qr.solve(y);
  SigmaEstimate est;
  est.df = n - rank;
  est.value = std::sqrt((y - fitted).squaredNorm() / static_cast<double>(est.df));
  est.estimated = true;
  if (!(est.value > 0.0)) throw ConfigError("sigma", "residuals vanish; sigma estimate is zero");
  return est;
}

namespace {

void sort_by_p(std::vector<ReportRow>& rows, std::size_t from) {
  std::stable_sort(rows.begin() + static_cast<std::ptrdiff_t>(from), rows.end(),
                   [](const ReportRow& a, const ReportRow& b) {
                     if (std::isnan(a.p_value)) return false;
                     return std::isnan(b.p_value) || a.p_value < b.p_value;
                   });
  for (std::size_t i = from; i < rows.size(); ++i) rows[i].rank = static_cast<int>(i - from) + 1;
}

}  // namespace

AnalysisReport analyze(const GroupedDesign& design, const Vector& y_raw, const AnalysisConfig& config) {
  if (y_raw.size() != design.n()) throw ConfigError("response", "response length does not match design rows");
  if (config.target < 1 || config.target > design.num_groups()) {
    throw ConfigError("target", "target group count must lie in [1, number of groups]");
  }
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw ConfigError("alpha", "alpha must lie in (0, 1)");
  if (config.sigma && !(*config.sigma > 0.0)) throw ConfigError("sigma", "sigma must be positive");

  const Vector y = y_raw.array() - y_raw.mean();
  AnalysisReport report;
  report.n = design.n();
  report.p = design.p();
  report.groups = design.num_groups();
  report.alpha = config.alpha;
  if (config.sigma) {
    report.sigma.value = *config.sigma;
  } else {
    report.sigma = estimate_sigma(design, y);
  }
  const double sigma = report.sigma.value;
  InferenceOptions opts;
  opts.alpha = config.alpha;

  if (config.run_fs) {
    const FsEvent event = fs_select(design, y, config.target);
    const auto sim = fs_infer_event(design, y, event, sigma, opts, FsMode::kSimultaneous);
    const auto seq = fs_infer_event(design, y, event, sigma, opts, FsMode::kSequential);
    for (std::size_t i = 0; i < sim.size(); ++i) {
      ReportRow row;
      row.selector = "fs";
      row.rank = static_cast<int>(i) + 1;
      row.group = sim[i].group;
      row.group_name = design.group_name(row.group);
      row.p_value = sim[i].p_value;
      row.p_value_sequential = seq[i].p_value;
      row.lower_bound = sim[i].lower_bound;
      report.rows.push_back(row);
    }
  }
  if (config.run_iht) {
    const auto res = iht_infer(design, y, IhtConfig::constant_step(config.target, config.iht_T, config.iht_eta),
                               sigma, opts);
    const std::size_t from = report.rows.size();
    for (const auto& r : res) {
      report.rows.push_back({"iht", 0, r.group, design.group_name(r.group), r.p_value, std::nullopt, r.lower_bound, {}});
    }
    sort_by_p(report.rows, from);
  }
  if (config.run_glasso) {
    auto solver = std::make_shared<const GlassoSolver>(design);
    const double lambda =
        config.glasso_lambda ? *config.glasso_lambda : glasso_lambda_for_count(*solver, y, config.target);
    report.glasso_lambda = lambda;
    const GlassoFit fit = solver->fit_response(y, lambda);
    GlassoInferenceOptions gopts;
    gopts.B = config.B;
    gopts.seed = config.seed;
    gopts.threads = config.threads;
    const std::size_t from = report.rows.size();
    for (int g : fit.active) {
      ReportRow row{"glasso", 0, g, design.group_name(g), kNaN, std::nullopt, kNaN, {}};
      try {
        const InferenceResult r = glasso_infer_group(solver, y, fit, g, sigma, opts, gopts);
        row.p_value = r.p_value;
        row.lower_bound = r.lower_bound;
      } catch (const DegenerateSampleError&) {
        row.note = "importance sample degenerate (effective size < 10); raise B";
      }
      report.rows.push_back(row);
    }
    sort_by_p(report.rows, from);
  }
  return report;
}

namespace {

std::string fixed(double x, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << x;
  return os.str();
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

void write_report_table(std::ostream& os, const AnalysisReport& report) {
  os << "n=" << report.n << " p=" << report.p << " groups=" << report.groups
     << " alpha=" << format_double(report.alpha) << '\n';
  os << "sigma=" << format_double(report.sigma.value)
     << (report.sigma.estimated ? " (estimated from OLS residuals, df=" + std::to_string(report.sigma.df) + ")"
                                : std::string(" (given)"))
     << '\n';
  if (report.glasso_lambda) os << "glasso_lambda=" << format_double(*report.glasso_lambda) << '\n';

  std::size_t width = 10;
  for (const auto& r : report.rows) width = std::max(width, r.group_name.size());
  std::string current;
  for (const auto& r : report.rows) {
    if (r.selector != current) {
      current = r.selector;
      os << '\n' << current << '\n';
      os << std::left << std::setw(6) << "rank" << std::setw(static_cast<int>(width) + 2) << "group"
         << std::setw(12) << "p_value";
      if (current == "fs") os << std::setw(12) << "p_seq";
      os << "lower_bound\n";
    }
    os << std::left << std::setw(6) << r.rank << std::setw(static_cast<int>(width) + 2) << r.group_name
       << std::setw(12) << fixed(r.p_value, 4);
    if (current == "fs") os << std::setw(12) << (r.p_value_sequential ? fixed(*r.p_value_sequential, 4) : "");
    os << fixed(r.lower_bound, 4);
    if (!r.note.empty()) os << "  " << r.note;
    os << '\n';
  }
}

void write_report_csv(std::ostream& os, const AnalysisReport& report) {
  os << "selector,rank,group_name,p_value,p_value_sequential,lower_bound\n";
  for (const auto& r : report.rows) {
    os << r.selector << ',' << r.rank << ',' << csv_quote(r.group_name) << ',' << format_double(r.p_value)
       << ',' << (r.p_value_sequential ? format_double(*r.p_value_sequential) : "") << ','
       << format_double(r.lower_bound) << '\n';
  }
}

}  // namespace groupinf
