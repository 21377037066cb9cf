#ifndef CVLAB_TOOLS_CLI_HPP
#define CVLAB_TOOLS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace cvlab::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 2,      // usage, config, bounds, budget and parse errors
    kNumerical = 3,  // singular systems, degenerate leverage
    kCheckFailed = 4,
};

/// Runs one command line (`args` excludes the program name). Results go to
/// `out`; the resolved seed and diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cvlab::cli

#endif  // CVLAB_TOOLS_CLI_HPP
