#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace simba::cli {

enum ExitCode : int {
    Ok = 0,
    Usage = 1,
    DataFailure = 2,
    NumericFailure = 3,
};

// Runs the command line `args` (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace simba::cli
