#pragma once

#include <iosfwd>

namespace relunet {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitBoundViolated = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;

// Entry point behind the `relunet` binary; split out so tests can drive it.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace relunet
