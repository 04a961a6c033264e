#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace entropic::cli {

enum ExitCode : int {
  exit_pass = 0,
  exit_acceptance_failure = 1,
  exit_usage_error = 2,
};

// Runs one subcommand; `args` excludes the program name. The report goes to `out` in the
// requested format and to <out-dir>/<subcommand>_report.<format>; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace entropic::cli
