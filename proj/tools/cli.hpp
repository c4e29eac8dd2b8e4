#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lacmatch::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 2,
  kInfeasible = 3,
  kMissingCache = 4,
  kInternal = 5,
};

/// Runs the command line `args` (without the program name). Never throws;
/// failures are reported on `err` and mapped to an ExitCode.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lacmatch::cli
