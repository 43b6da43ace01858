#pragma once

#include <ostream>

namespace tdc::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,          // bad flags or incompatible inputs
  kIo = 2,             // unreadable/unwritable files, corrupt containers
  kNumeric = 3,        // non-finite values, degenerate descriptors, failed gradient check
  kOrchestration = 4,  // answerer failures
};

/// Runs one subcommand. Writes a single JSON record to `out` on success and a
/// diagnostic to `err` on failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tdc::cli
