#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace htpv::cli {

/// Process exit codes shared by every subcommand.
enum ExitCode : int {
    exit_ok = 0,
    exit_input = 2,    // missing/unparsable/invalid input or bad flags
    exit_pairing = 3,  // estimates and annotation do not cover the same frames
    exit_output = 4,   // output could not be written
};

/// Runs the command line `args` (without the program name). Regular output
/// goes to `out`; failures are reported on `err` as a single JSON object
/// `{"error": <id>, "message": <text>, "exit_code": <n>}`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace htpv::cli
