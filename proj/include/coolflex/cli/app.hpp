#pragma once

#include <iosfwd>

namespace coolflex::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kDivergence = 3,
  kMissingInput = 4,
};

/// Parses arguments and runs one subcommand. Messages go to `out`, errors
/// to `err`. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace coolflex::cli
