#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace groupinf {

/// Entry point behind the groupinf executable. Returns the process exit
/// code: 0 on success, 1 on a runtime failure, 2 on a configuration error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses a flat key=value file into --key=value arguments. Blank lines and
/// lines starting with '#' are skipped.
std::vector<std::string> read_config_file(const std::string& path);

}  // namespace groupinf
