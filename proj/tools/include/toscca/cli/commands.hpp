#pragma once

#include "toscca/cli/run_config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace toscca::cli {

enum ExitCode : int { ok = 0, usage_error = 2, input_error = 3, runtime_error = 4 };

/// Full command line (without the program name): subcommand then flags.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cmd_analyze(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_permtest(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace toscca::cli
