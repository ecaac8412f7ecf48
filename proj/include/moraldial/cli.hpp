#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace moraldial {

/// Runs the `moraldial` command line. `args` excludes the program name.
/// Returns the process exit status: 0 on success, 1 on a runtime failure and
/// 2 on a usage or configuration error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace moraldial
