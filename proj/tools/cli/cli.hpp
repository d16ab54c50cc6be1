#pragma once

#include <ostream>

namespace hardc::cli {

enum ExitCode { ok = 0, usage = 1, data_error = 2, numeric_error = 3 };

// Parses argv (argv[0] is the program name), runs one subcommand and maps
// errors to exit codes with a one-line diagnostic on err.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Invariant suite behind `hardc selftest`. Returns the number of failures.
int run_selftest(std::ostream& out);

}  // namespace hardc::cli
