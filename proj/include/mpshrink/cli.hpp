#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mpshrink::cli {

/// Stable exit codes.
enum Exit : int { ok = 0, failure = 1, budget = 2, config = 3, io = 4 };

/// Runs one command line (args excludes the program name). Reports go to
/// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mpshrink::cli
