#pragma once

#include <iosfwd>

namespace rads::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Entry point behind the `rads` executable. Subcommands: score, select,
// experiment, sweep, corpusgap, validate. Results go to --output files (written
// atomically) or to `out` when no file is named; diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rads::cli
