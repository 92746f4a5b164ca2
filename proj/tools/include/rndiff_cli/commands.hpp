#pragma once

#include <ostream>

namespace rndiff::cli {

/// Process exit codes.
enum ExitCode : int {
    ok = 0,
    io_failure = 1,
    validation_failure = 2,
    numerical_failure = 3,
    scheme_check_failed = 4,
    internal_failure = 70,
};

/// Parses the command line and runs one subcommand. Regular output goes to
/// `out`; diagnostics go to `err`, failures as a single JSON object
/// {"error": kind, "message": text}.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rndiff::cli
