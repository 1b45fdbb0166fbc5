#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rmcst {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Entry point for the `rmcst` tool. `args` excludes the program name.
/// Errors are reported on `err` as one line: error: code=<Code> message=<text>.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rmcst
