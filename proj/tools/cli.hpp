#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace svgd::cli {

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "SVGD_OUTPUT_DIR";

/// Runs the `svgd` command line. `args` excludes the program name.
/// Exit codes: 0 success, 1 check or numerical failure, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace svgd::cli
