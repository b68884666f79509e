#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace specdec {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitInfeasible = 3,
};

/// Runs one CLI invocation. `args` excludes the program name.
/// Reports go to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace specdec
