#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace covloss {

/// Exit codes of the command line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,  // monotonicity or property check failed
  kExitConfigError = 2,
  kExitInternalError = 3,
};

/// Runs the tool; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_cli(int argc, char** argv);

}  // namespace covloss
