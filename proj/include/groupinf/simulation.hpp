#pragma once

#include "groupinf/forward_stepwise.hpp"
#include "groupinf/projections.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace groupinf {

enum class SelectorKind { kFs, kIht, kGlasso };

std::string to_string(SelectorKind kind);
/// "fs", "iht" or "glasso"; throws ConfigError("selector") otherwise.
SelectorKind parse_selector(const std::string& name);

struct SelectorConfig {
  SelectorKind kind = SelectorKind::kFs;
  int fs_steps = 3;
  FsMode fs_mode = FsMode::kSimultaneous;
  int iht_k = 3;
  int iht_T = 3;
  double iht_eta = 2.0;
  double glasso_lambda = 2.0;
  int B = 20000;
};

struct SimConfig {
  int n = 100;
  int G = 10;
  int group_size = 3;
  int s = 2;
  double tau = 0.0;
  double sigma = 1.0;
  int trials = 500;
  SelectorConfig selector;
  double alpha = 0.1;
  std::uint64_t seed = 1;
  int threads = 1;

  void validate() const;
  /// key=value lines that fully determine the run.
  std::vector<std::string> describe() const;
};

/// Small designs meant for a laptop: n=100, G=10, groups of 3, s=2.
SimConfig desk_preset(SelectorKind kind);
/// n=500, G=50, groups of 10, s=5, tau=1.5, alpha=0.1; FS T=10 simultaneous,
/// IHT k=10 T=5 eta=2, group lasso lambda=4.
SimConfig paper_preset(SelectorKind kind);

struct Trial {
  GroupedDesign design;
  Vector beta;
  Vector mu;
  Vector Y;
};

/// X with iid N(0, 1/n) entries, beta = tau on the first s groups,
/// Y = X beta + sigma * N(0, I).
Trial generate_trial(const SimConfig& config, std::uint64_t trial_seed);

struct TrialRecord {
  int trial = 0;
  int group = 0;
  bool is_null = true;
  double p = 0.0;
  double L_alpha = 0.0;
  double truth_norm = 0.0;   // ||P_L mu||
  double truth_inner = 0.0;  // <dir_L(Y), mu>
  double rank_stat = 0.0;    // f_Y(truth_inner); NaN for sampled regions
  double p_std_error = 0.0;  // NaN for exact regions
};

struct TrialFailure {
  int trial = 0;
  std::string message;
};

struct KsResult {
  double statistic = 0.0;
  double critical = 0.0;
  bool pass = false;
  std::size_t n = 0;
};

/// One-sample KS statistic against Uniform[0, 1] with the asymptotic
/// critical value sqrt(-ln(level / 2) / 2) / sqrt(N).
KsResult ks_uniformity(std::span<const double> values, double level = 0.01);

struct Coverage {
  std::size_t count = 0;
  std::size_t covered_norm = 0;
  std::size_t covered_inner = 0;
  double norm_rate() const { return count ? static_cast<double>(covered_norm) / count : 0.0; }
  double inner_rate() const { return count ? static_cast<double>(covered_inner) / count : 0.0; }
};

struct SimReport {
  SimConfig config;
  std::vector<TrialRecord> records;
  std::vector<TrialFailure> failures;
  int empty_selections = 0;
  double runtime_seconds = 0.0;

  std::vector<double> null_pvalues() const;
  std::vector<double> signal_pvalues() const;
  /// f_Y at the true noncentrality, all tested groups with explicit regions.
  std::vector<double> rank_statistics() const;
  Coverage coverage(bool null_groups) const;
  /// Records where the norm indicator is below the inner-product indicator.
  std::size_t superset_violations() const;
  /// Records where (p < alpha) != (L_alpha > 0).
  std::size_t sign_violations() const;
};

/// Runs every trial; a trial whose selector or inference throws is recorded
/// in `failures` and skipped. Output is independent of `threads`.
SimReport run_simulation(const SimConfig& config);

/// Runs the configured selector and inference on one trial.
std::vector<TrialRecord> run_trial(const SimConfig& config, int trial_index);

void write_records_csv(std::ostream& os, const SimReport& report);
/// Summary block; runtime is omitted so that reruns compare byte-for-byte.
void write_summary(std::ostream& os, const SimReport& report);

/// Shortest round-trip decimal form; "inf", "-inf", "nan" for non-finite values.
std::string format_double(double x);

}  // namespace groupinf
