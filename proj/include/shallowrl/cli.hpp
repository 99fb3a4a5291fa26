#pragma once

#include <iosfwd>

namespace shallowrl::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kRuntime = 2,
  kProtocol = 3,
};

/// Parses argv and runs one subcommand. Normal output goes to out, diagnostics
/// to err.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace shallowrl::cli
