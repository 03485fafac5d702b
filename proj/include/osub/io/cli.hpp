#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace osub::io {

// Entry point of the `osub` tool. args[0] is the program name.
// Exit codes: 0 success, 1 validation or usage error, 2 runtime failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace osub::io
