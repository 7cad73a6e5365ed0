#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace diagform {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2, kExitResource = 3 };

// Batch front end. Subcommands: correlate, gaps, smooth, dioph {count-eq,
// count-ineq, fejer, exponent}, census, sweep, dump-seq.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace diagform
