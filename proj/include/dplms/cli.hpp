#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dplms {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfigError = 1,
    kExitRuntimeError = 2,
};

/// Entry point of the `dplms` command line tool. `args` excludes the program
/// name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dplms
