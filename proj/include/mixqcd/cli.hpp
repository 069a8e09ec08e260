#pragma once

#include <iosfwd>

namespace mixqcd {

inline constexpr const char* kVersion = "0.3.1";

/// Exit codes of the command-line front end.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumerical = 3 };

/// Entry point of the `mixqcd` binary. Results go to `out`, usage text and
/// diagnostics to `err`.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mixqcd
