// cli.hpp
//
// Command-line front end. Exit codes: 0 success or passing verdict, 1 failing
// verdict, 2 usage or configuration error, 3 resource error. Every error is
// reported as one line "error: <code>: <message>" on the error stream.

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace subbasis::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerdictFail = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitResource = 3;

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace subbasis::cli
