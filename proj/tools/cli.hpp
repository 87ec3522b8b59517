#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gmacldpc::cli {

/// Runs the command line tool on `args` (without the program name).
/// Returns 0 on success, 1 on usage errors (bad flags, unreadable or invalid
/// config) and 2 on runtime failures.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gmacldpc::cli
