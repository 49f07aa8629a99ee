#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace upm::cli {

/// Runs one command line (without the program name). Returns 0 on success,
/// 1 for user errors (bad flags, bad input files, library errors) and 2 for
/// anything unexpected. Results go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace upm::cli
