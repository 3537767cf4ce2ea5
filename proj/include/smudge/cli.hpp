#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace smudge::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kOk = 0, kRuntimeFailure = 1, kUsageError = 2 };

/// Runs the command line `args` (without the program name). Diagnostics go
/// to `err`, human-readable results to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace smudge::cli
