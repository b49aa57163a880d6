#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace zfo {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitAssumption = 3,
  kExitOracle = 4,
};

// Parses `args` (without the program name) and runs the subcommand.
int Dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Worker budget for sweeps: ZFO_WORKERS if set and positive, else the
// hardware concurrency (at least 1).
int DefaultWorkers();

}  // namespace zfo
