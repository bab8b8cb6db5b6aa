#pragma once

#include <iosfwd>

namespace greyharvest::cli {

enum ExitCode : int {
  kOk = 0,
  kClassNone = 1,  // the resolved record has none of T/C/D/A
  kUsage = 2,
  kIoError = 3,
};

/// The command-line front end. Artifacts go to `out`, diagnostics to `err`
/// as single-line JSON objects.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace greyharvest::cli
