#pragma once

#include <ostream>

namespace linwalk::cli {

/// Runs the command line; returns the process exit code (0 success,
/// 2 validation or usage error, 3 I/O error).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace linwalk::cli
