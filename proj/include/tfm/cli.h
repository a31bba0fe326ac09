#pragma once

#include <iosfwd>

namespace tfm {

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitRuntime = 2,
  kExitPropertyFailed = 3,
};

/// Entry point of the tfmlab tool. Never throws; errors map to exit codes.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tfm
