#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace huberfactor::cli {

enum ExitCode : int { ok = 0, usage_error = 2, data_error = 3, numerical_error = 4 };

/// Runs one command line (without the program name). Success output goes to
/// `out`, diagnostics to `err`; the return value follows ExitCode.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace huberfactor::cli
