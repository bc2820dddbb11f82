#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace owrc::cli {

enum ExitCode : int {
    kOk = 0,
    kInputError = 1,
    kIterationCap = 2,
    kSolverFailure = 3,
    kCheckFailed = 4,
};

/// Entry point of the owrc command line tool; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace owrc::cli
