#pragma once

#include <string>
#include <vector>

namespace mandikin::cli {

/// Exit codes of the command-line front end.
enum ExitCode { kOk = 0, kUsage = 1, kIo = 2, kNumeric = 3 };

/// Runs one invocation; args excludes the program name. Diagnostics go to stderr.
int run(const std::vector<std::string>& args);

}  // namespace mandikin::cli
