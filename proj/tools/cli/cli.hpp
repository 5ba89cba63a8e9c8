#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace capqe::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitPartial = 3;  // some chunks or captions failed; rerun to resume
inline constexpr int kExitKilled = 86;  // CAPQE_KILL_POINT fired

// Subcommands: sample, run, score, refine, evaluate, serve, stats, export.
// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace capqe::cli
