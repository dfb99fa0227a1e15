#pragma once

#include <iosfwd>

namespace plidar {

/// Exit codes: 0 success, 1 partial failure, 2 configuration error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitPartialFailure = 1;
inline constexpr int kExitConfigError = 2;

/// Entry point behind the `plidar` executable (subcommands run / eval / bench).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace plidar
