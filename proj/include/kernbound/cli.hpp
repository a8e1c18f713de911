#pragma once

#include <string>
#include <vector>

namespace kernbound {

// Full command-line entry point: parses flags and config, dispatches the
// subcommand, emits the report artifact, and maps exceptions to exit codes
// (0 success, 1 verify failure, 2 usage/config, 3 data).
int run_cli(int argc, const char* const* argv);

// Test convenience: args without the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace kernbound
