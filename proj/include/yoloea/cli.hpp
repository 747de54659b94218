#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace yoloea::cli {

enum class OutputFormat { Json, Csv, Table };

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs the command line `args` (args[0] is the program name) and returns the
/// process exit code. Results go to `out`, diagnostics and usage to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace yoloea::cli
