#pragma once

// Entry point of the topoflow command-line tool. Kept out of main() so tests
// can run subcommands in-process.

#include <string>
#include <vector>

namespace topoflow::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitInput = 2,
};

// args[0] is the program name. Never throws; failures map to exit codes.
int run(const std::vector<std::string>& args);

}  // namespace topoflow::cli
