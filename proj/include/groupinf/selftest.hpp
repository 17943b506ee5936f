#pragma once

#include <string>
#include <vector>

namespace groupinf {

struct SelftestOptions {
  // Relative tolerance handed to the radial quadrature; raising it is the
  // fault-injection knob.
  double quad_tol = 1e-9;
  int threads = 1;
};

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<std::string> selftest_names();

/// Runs the named checks (all when `names` is empty). Unknown names throw
/// ConfigError.
std::vector<CheckResult> run_selftests(const SelftestOptions& opts,
                                       const std::vector<std::string>& names = {});

}  // namespace groupinf
