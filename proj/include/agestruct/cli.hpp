#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace agestruct {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitAssumption = 3,
  kExitNumerical = 4,
};

/// Runs one command line (args[0] is the program name). Human-readable
/// summaries go to `out`, diagnostics to `err`; data files are written under
/// the output directory.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace agestruct
