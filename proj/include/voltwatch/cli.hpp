#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace voltwatch::cli {

// Exit codes: 0 success, 1 usage error, 2 data/schema error, 3 numeric error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;

// Runs one subcommand (gen-data, analyze-correlation, train, eval,
// grid-search, diagnose, export-recon).  `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace voltwatch::cli
