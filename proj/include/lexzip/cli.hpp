#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lexzip::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Entry point of the `lexzip` executable. args[0] is the program name.
/// Diagnostics and the resolved run configuration go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lexzip::cli
