#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace blindspot::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kInternal = 3 };

/// Entry point of the `blindspot` tool. Failures are reported as one line
/// `error: <Code>: <message>` on `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace blindspot::cli
