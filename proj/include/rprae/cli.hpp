#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rprae {

// The whole command-line front end, argv[1:] in, exit code out.
// 0 = success, 1 = runtime failure, 2 = usage error. All human output goes
// to `out`, diagnostics to `err`; nothing touches the real stdio, so tests
// drive commands in-process.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rprae
