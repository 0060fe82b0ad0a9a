#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace odsaudit {

// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitFileError = 2,
  kExitInvalidFilter = 3,
  kExitCheckpoint = 4,
  kExitNoHistory = 5,
};

// Runs one command. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace odsaudit
