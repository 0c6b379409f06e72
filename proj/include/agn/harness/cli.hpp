#pragma once

#include <exception>
#include <ostream>

namespace agn {

// Process exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;     // verification failure or failed sweep cells
inline constexpr int kExitUsage = 2;       // bad flags or invalid arguments
inline constexpr int kExitIo = 3;
inline constexpr int kExitParse = 4;
inline constexpr int kExitInfeasible = 5;
inline constexpr int kExitNonFinite = 6;

// Environment variable that overrides the default output directory.
inline constexpr const char* kOutDirEnv = "AGN_OUT_DIR";

int exit_code_for(const std::exception& e);

/// Entry point of the `agn` tool. Subcommands: train, sweep, verify,
/// oracle, plot.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace agn
