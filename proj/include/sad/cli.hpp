#pragma once

#include <string>
#include <vector>

namespace sad {

/// Exit codes of the `sad` command.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1, // runtime, data or numeric error
    kExitUsage = 2,
    kExitConfig = 3, // config missing or invalid
};

/// Entry point of the `sad` command. Errors are reported on stderr as one
/// JSON line: {"error": <kind>, "message": <text>}.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args); // without the program name

} // namespace sad
