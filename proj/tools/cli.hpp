#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qruns::cli {

/// Runs one command line (without the program name). Returns the process
/// exit code: 0 success, 1 verification mismatch, 2 argument error.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace qruns::cli
