#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pfsq::cli {

/// Exit statuses of the command-line tool.
enum ExitCode : int {
    kOk = 0,
    kInvalidInput = 1,
    kSaturated = 2,
    kNotConverged = 3,
    kSimulationMismatch = 4,
};

/// Runs one command line (args[0] is the program name). Reports go to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pfsq::cli
