#pragma once

namespace mobgen::cli {

/// Exit codes of the mobgen executable.
enum ExitCode : int {
  kOk = 0,
  kInternal = 1,  // unexpected failure (e.g. training diverged)
  kIo = 2,
  kData = 3,  // schema or data violation, invalid arguments
  kCompat = 4,
};

/// Parses the command line, runs one subcommand and writes its manifest.
int run(int argc, const char* const* argv);

}  // namespace mobgen::cli
