#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dcs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs dcsctl with `args` (args[0] is the program name). Results go to
/// `out`, diagnostics and scan statistics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dcs::cli
