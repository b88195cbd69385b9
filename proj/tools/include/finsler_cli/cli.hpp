#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace finsler::cli {

enum ExitCode : int {
  kPass = 0,
  kCheckFailed = 1,  ///< fail or inconclusive verdict
  kUsage = 2,        ///< bad arguments or config
  kNoConvergence = 3,
};

/// Runs the command line `argv[0] subcommand ...`. Reports go to `out`,
/// JSON-lines diagnostics to `err`.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace finsler::cli
