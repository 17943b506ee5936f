#include "groupinf/cli.hpp"

#include "groupinf/data_pipeline.hpp"
#include "groupinf/errors.hpp"
#include "groupinf/parallel.hpp"
#include "groupinf/selftest.hpp"
#include "groupinf/simulation.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace groupinf {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Splices the config file's arguments in front of the user's, right after
// the subcommand, so that later (command-line) values win.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (!path) return args;
  const auto file_args = read_config_file(*path);
  std::vector<std::string> out;
  std::size_t insert_at = args.size() > 1 && args[1].rfind("-", 0) != 0 ? 2 : 1;
  out.insert(out.end(), args.begin(), args.begin() + static_cast<std::ptrdiff_t>(std::min(insert_at, args.size())));
  out.insert(out.end(), file_args.begin(), file_args.end());
  out.insert(out.end(), args.begin() + static_cast<std::ptrdiff_t>(std::min(insert_at, args.size())), args.end());
  return out;
}

std::ofstream open_output(const std::string& path, const char* option) {
  std::ofstream f(path);
  if (!f) throw ConfigError(option, "cannot open " + path + " for writing");
  return f;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct SimulateFlags {
  std::string selector = "fs";
  std::string preset = "desk";
  std::optional<int> n, G, group_size, s, trials, steps, k, iterations, B, threads;
  std::optional<double> tau, sigma, alpha, eta, lambda;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> fs_mode;
  std::string out_path = "groupinf_sim.csv";
  std::string summary_path;
};

struct AnalyzeFlags {
  std::string input;
  std::string response;
  std::string predictors;
  bool log_response = false;
  bool no_standardize = false;
  int degree = 3;
  int target = 8;
  std::string selectors = "fs,iht,glasso";
  std::optional<double> sigma, lambda;
  double alpha = 0.1;
  int B = 20000;
  std::uint64_t seed = 1;
  int iterations = 5;
  double eta = 2.0;
  std::string delimiter = ",";
  std::string out_path;
  std::optional<int> threads;
};

struct SelftestFlags {
  bool list = false;
  double quad_tol = 1e-9;
  std::string only;
  std::optional<int> threads;
};

int run_simulate(const SimulateFlags& f, std::ostream& out) {
  const SelectorKind kind = parse_selector(f.selector);
  SimConfig cfg;
  if (f.preset == "desk") {
    cfg = desk_preset(kind);
  } else if (f.preset == "paper") {
    cfg = paper_preset(kind);
  } else if (f.preset == "none") {
    cfg = desk_preset(kind);
    std::vector<std::string> missing;
    if (!f.n) missing.push_back("--n");
    if (!f.G) missing.push_back("--G");
    if (!f.group_size) missing.push_back("--group-size");
    if (!f.s) missing.push_back("--s");
    if (!f.tau) missing.push_back("--tau");
    if (!f.sigma) missing.push_back("--sigma");
    if (!f.trials) missing.push_back("--trials");
    if (!missing.empty()) {
      std::string names;
      for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
      throw ConfigError(missing.front().substr(2),
                        "missing " + names + " (no default with --preset none)");
    }
  } else {
    throw ConfigError("preset", "unknown preset '" + f.preset + "' (expected desk, paper or none)");
  }
  if (f.n) cfg.n = *f.n;
  if (f.G) cfg.G = *f.G;
  if (f.group_size) cfg.group_size = *f.group_size;
  if (f.s) cfg.s = *f.s;
  if (f.tau) cfg.tau = *f.tau;
  if (f.sigma) cfg.sigma = *f.sigma;
  if (f.trials) cfg.trials = *f.trials;
  if (f.alpha) cfg.alpha = *f.alpha;
  if (f.seed) cfg.seed = *f.seed;
  if (f.steps) cfg.selector.fs_steps = *f.steps;
  if (f.k) cfg.selector.iht_k = *f.k;
  if (f.iterations) cfg.selector.iht_T = *f.iterations;
  if (f.eta) cfg.selector.iht_eta = *f.eta;
  if (f.lambda) cfg.selector.glasso_lambda = *f.lambda;
  if (f.B) cfg.selector.B = *f.B;
  if (f.fs_mode) {
    if (*f.fs_mode == "simultaneous") {
      cfg.selector.fs_mode = FsMode::kSimultaneous;
    } else if (*f.fs_mode == "sequential") {
      cfg.selector.fs_mode = FsMode::kSequential;
    } else {
      throw ConfigError("fs-mode", "expected simultaneous or sequential");
    }
  }
  cfg.threads = f.threads ? *f.threads : default_thread_count();
  cfg.validate();

  std::ofstream csv = open_output(f.out_path, "out");
  std::optional<std::ofstream> summary;
  if (!f.summary_path.empty()) summary = open_output(f.summary_path, "summary");

  const SimReport report = run_simulation(cfg);
  write_records_csv(csv, report);
  write_summary(out, report);
  if (summary) write_summary(*summary, report);
  out << "runtime_seconds=" << format_double(report.runtime_seconds) << '\n';
  out << "records_csv=" << f.out_path << '\n';
  return 0;
}

int run_analyze(const AnalyzeFlags& f, std::ostream& out) {
  if (f.input.empty()) throw ConfigError("input", "an input CSV is required");
  if (f.delimiter.size() != 1) throw ConfigError("delimiter", "delimiter must be a single character");
  if (f.degree != 1 && f.degree != 3) throw ConfigError("degree", "degree must be 1 or 3");
  if (f.B < 1) throw ConfigError("B", "B must be at least 1");
  if (f.iterations < 1) throw ConfigError("iterations", "need at least one iteration");
  if (!(f.eta > 0.0)) throw ConfigError("eta", "eta must be positive");
  if (f.lambda && !(*f.lambda > 0.0)) throw ConfigError("lambda", "lambda must be positive");
  if (f.sigma && !(*f.sigma > 0.0)) throw ConfigError("sigma", "sigma must be positive");
  if (!(f.alpha > 0.0 && f.alpha < 1.0)) throw ConfigError("alpha", "alpha must lie in (0, 1)");
  if (f.threads && *f.threads < 1) throw ConfigError("threads", "threads must be at least 1");

  AnalysisConfig cfg;
  cfg.run_fs = cfg.run_iht = cfg.run_glasso = false;
  for (const auto& name : split_list(f.selectors)) {
    const SelectorKind kind = parse_selector(name);
    if (kind == SelectorKind::kFs) cfg.run_fs = true;
    if (kind == SelectorKind::kIht) cfg.run_iht = true;
    if (kind == SelectorKind::kGlasso) cfg.run_glasso = true;
  }
  if (!cfg.run_fs && !cfg.run_iht && !cfg.run_glasso) throw ConfigError("selectors", "no selector given");
  cfg.target = f.target;
  cfg.alpha = f.alpha;
  cfg.sigma = f.sigma;
  cfg.iht_T = f.iterations;
  cfg.iht_eta = f.eta;
  cfg.glasso_lambda = f.lambda;
  cfg.B = f.B;
  cfg.seed = f.seed;
  cfg.threads = f.threads ? *f.threads : default_thread_count();

  LoadOptions lo;
  lo.response = f.response;
  lo.predictors = split_list(f.predictors);
  lo.log_response = f.log_response;
  const Dataset data = load_csv(f.input, lo, f.delimiter[0]);
  const GroupedDesign design = legendre_expand(data, f.degree, !f.no_standardize);
  if (f.target > design.num_groups()) {
    throw ConfigError("target", "target exceeds the number of predictors (" +
                                    std::to_string(design.num_groups()) + ")");
  }
  const AnalysisReport report = analyze(design, data.y, cfg);

  std::vector<std::string> echo = {
      "input=" + f.input,
      "response=" + f.response,
      "log_response=" + std::string(f.log_response ? "true" : "false"),
      "standardize=" + std::string(f.no_standardize ? "false" : "true"),
      "degree=" + std::to_string(f.degree),
      "target=" + std::to_string(f.target),
      "selectors=" + f.selectors,
      "alpha=" + format_double(f.alpha),
      "iterations=" + std::to_string(f.iterations),
      "eta=" + format_double(f.eta),
      "B=" + std::to_string(f.B),
      "seed=" + std::to_string(f.seed),
      "rows_read=" + std::to_string(data.rows_read),
      "rows_dropped=" + std::to_string(data.rows_dropped),
      "sigma=" + format_double(report.sigma.value) + (report.sigma.estimated ? " (estimated)" : " (given)"),
  };
  if (!f.predictors.empty()) echo.insert(echo.begin() + 2, "predictors=" + f.predictors);
  if (report.glasso_lambda) echo.push_back("lambda=" + format_double(*report.glasso_lambda));

  for (const auto& line : echo) out << "# " << line << '\n';
  write_report_table(out, report);
  if (!f.out_path.empty()) {
    std::ofstream csv = open_output(f.out_path, "out");
    for (const auto& line : echo) csv << "# " << line << '\n';
    write_report_csv(csv, report);
  }
  return 0;
}

int run_selftest(const SelftestFlags& f, std::ostream& out) {
  if (f.list) {
    for (const auto& name : selftest_names()) out << name << '\n';
    return 0;
  }
  if (!(f.quad_tol > 0.0)) throw ConfigError("quad-tol", "quadrature tolerance must be positive");
  SelftestOptions opts;
  opts.quad_tol = f.quad_tol;
  opts.threads = f.threads ? *f.threads : default_thread_count();
  const auto results = run_selftests(opts, split_list(f.only));
  std::vector<std::string> failed;
  for (const auto& r : results) {
    out << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    if (!r.pass) failed.push_back(r.name);
  }
  if (failed.empty()) return 0;
  out << "failed checks:";
  for (const auto& name : failed) out << ' ' << name;
  out << '\n';
  return 1;
}

}  // namespace

std::vector<std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read config file " + path);
  std::vector<std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config", path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    while (!key.empty() && key[0] == '-') key.erase(0, 1);
    if (key.empty()) throw ConfigError("config", path + ":" + std::to_string(lineno) + ": empty key");
    if (key == "config") continue;
    out.push_back("--" + key + "=" + value);
  }
  return out;
}

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Selective inference for group-sparse regression"};
  app.name("groupinf");
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  std::string config_path;
  SimulateFlags sf;
  auto* sim = app.add_subcommand("simulate", "Run a simulation study");
  sim->add_option("--config", config_path, "key=value file; command-line flags override it");
  sim->add_option("--selector", sf.selector, "fs, iht or glasso")->capture_default_str();
  sim->add_option("--preset", sf.preset, "desk, paper or none")->capture_default_str();
  sim->add_option("--n", sf.n, "sample size");
  sim->add_option("--G", sf.G, "number of groups");
  sim->add_option("--group-size", sf.group_size, "columns per group");
  sim->add_option("--s", sf.s, "number of true groups");
  sim->add_option("--tau", sf.tau, "signal strength");
  sim->add_option("--sigma", sf.sigma, "noise standard deviation");
  sim->add_option("--trials", sf.trials, "number of trials");
  sim->add_option("--alpha", sf.alpha, "level of the lower bound");
  sim->add_option("--seed", sf.seed, "master seed");
  sim->add_option("--threads", sf.threads, "worker threads (default: all cores)");
  sim->add_option("--steps", sf.steps, "forward stepwise steps T");
  sim->add_option("--fs-mode", sf.fs_mode, "simultaneous or sequential");
  sim->add_option("--k", sf.k, "IHT group count");
  sim->add_option("--iterations", sf.iterations, "IHT iterations T");
  sim->add_option("--eta", sf.eta, "IHT step size");
  sim->add_option("--lambda", sf.lambda, "group lasso penalty");
  sim->add_option("--B", sf.B, "importance samples per tested group");
  sim->add_option("--out", sf.out_path, "per-record CSV output")->capture_default_str();
  sim->add_option("--summary", sf.summary_path, "summary output file");

  AnalyzeFlags af;
  auto* ana = app.add_subcommand("analyze", "Analyze a CSV data set");
  ana->add_option("--config", config_path, "key=value file; command-line flags override it");
  ana->add_option("--input", af.input, "input CSV");
  ana->add_option("--response", af.response, "response column");
  ana->add_option("--predictors", af.predictors, "comma-separated predictor columns (default: all others)");
  ana->add_flag("--log-response", af.log_response, "take the natural log of the response");
  ana->add_flag("--no-standardize", af.no_standardize, "expand raw predictor values instead of z-scores");
  ana->add_option("--degree", af.degree, "1 (linear) or 3 (Legendre groups)")->capture_default_str();
  ana->add_option("--target", af.target, "groups to select")->capture_default_str();
  ana->add_option("--selectors", af.selectors, "comma-separated subset of fs,iht,glasso")->capture_default_str();
  ana->add_option("--sigma", af.sigma, "noise level (default: estimated from OLS residuals)");
  ana->add_option("--alpha", af.alpha, "level of the lower bound")->capture_default_str();
  ana->add_option("--lambda", af.lambda, "group lasso penalty (default: chosen for --target groups)");
  ana->add_option("--B", af.B, "importance samples per tested group")->capture_default_str();
  ana->add_option("--seed", af.seed, "master seed")->capture_default_str();
  ana->add_option("--iterations", af.iterations, "IHT iterations")->capture_default_str();
  ana->add_option("--eta", af.eta, "IHT step size")->capture_default_str();
  ana->add_option("--delimiter", af.delimiter, "field delimiter")->capture_default_str();
  ana->add_option("--out", af.out_path, "report CSV output");
  ana->add_option("--threads", af.threads, "worker threads (default: all cores)");

  SelftestFlags tf;
  auto* st = app.add_subcommand("selftest", "Run the built-in oracle checks");
  st->add_option("--config", config_path, "key=value file; command-line flags override it");
  st->add_flag("--list", tf.list, "list check names without running them");
  st->add_option("--quad-tol", tf.quad_tol, "quadrature relative tolerance")->capture_default_str();
  st->add_option("--only", tf.only, "comma-separated check names");
  st->add_option("--threads", tf.threads, "worker threads");

  try {
    const std::vector<std::string> args = expand_config(raw_args);
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
      if (e.get_exit_code() == 0) return app.exit(e, out, err);
      err << "error: " << e.what() << '\n';
      return 2;
    }

    if (sim->parsed()) return run_simulate(sf, out);
    if (ana->parsed()) return run_analyze(af, out);
    return run_selftest(tf, out);
  } catch (const ConfigError& e) {
    err << "error: --" << e.option() << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace groupinf
