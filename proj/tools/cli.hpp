#pragma once

#include <iosfwd>

namespace softhand::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kRuntime = 2 };

// Entry point shared by the `softhand` binary and the CLI tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace softhand::cli
