#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace soclearn {

// Exit codes: 0 success, 1 validation or acceptance failure, 2 runtime error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitError = 2;

// `args` excludes the program name. Errors are written to `err` as one JSON line.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace soclearn
