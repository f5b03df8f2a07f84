#pragma once

#include <iosfwd>

namespace fedsel::cli {

/// Process exit statuses.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kBadConfig = 3,
  kIoError = 4,
};

/// Parses argv, runs the requested pipeline, and returns the exit status.
/// Normal output goes to `out`; diagnostics go to `err` as one line.
int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fedsel::cli
