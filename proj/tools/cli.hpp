#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace npk::cli {

/// Runs the `npk` command line (args excludes the program name) and returns
/// the exit code: 0 pass, 1 check failure, 2 usage or configuration error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace npk::cli
