#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dirac::cli {

inline constexpr const char* kToolVersion = "1.0.0";

/// Exit codes: 0 success, 1 failed reference check or I/O failure, 2 usage error,
/// 3 numerical-domain error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDomain = 3;

/// Runs one subcommand. `args` excludes the program name. The JSON envelope goes to `out`;
/// usage text and the human-readable summary go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace dirac::cli
