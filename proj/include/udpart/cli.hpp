#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace udpart::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInvariantViolation = 1,
  kUsageError = 2,
};

/// Runs the command line `args` (without the program name). Commands:
/// generate, rearrange, diagnose, bounds, conjecture, araki. Every command
/// accepts --config file.json; its keys are merged under the flags, which win.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace udpart::cli
