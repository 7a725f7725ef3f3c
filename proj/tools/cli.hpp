#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rdpr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;

/// Runs the command line (args excludes the program name). Results go to
/// --out or `out`; messages go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rdpr::cli
