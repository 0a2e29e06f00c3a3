#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cusparity {

/// Exit codes of the command-line tool.
enum ExitCode : int {
    exit_ok = 0,
    exit_sz_violation = 1,
    exit_pipeline_error = 2,
    exit_cross_check = 3,
    /// The run finished but the answer is negative: an unsatisfied verdict
    /// or an oracle disagreement.
    exit_negative = 4,
};

/// Runs the tool on argv without the program name. Errors are written to
/// `err` as a JSON object.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace cusparity
