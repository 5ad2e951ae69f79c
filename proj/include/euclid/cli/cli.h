#pragma once

#include <string>
#include <vector>

namespace euclid {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

// Entry point behind the `euclid` binary. args excludes the program name.
int RunCli(const std::vector<std::string>& args);

}  // namespace euclid
