#pragma once

#include <iosfwd>

namespace spamsift::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kInput = 2, kModel = 3 };

/// Entry point for the `spamsift` tool; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace spamsift::cli
