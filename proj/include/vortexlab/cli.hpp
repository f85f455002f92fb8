#ifndef VORTEXLAB_CLI_HPP
#define VORTEXLAB_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace vortexlab {

/// Exit codes of the command-line front end.
enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitRuntime = 2 };

/// Runs one subcommand. `args` excludes the program name.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_dispatch(int argc, const char* const* argv);

}  // namespace vortexlab

#endif  // VORTEXLAB_CLI_HPP
