#pragma once

// Command-line front end. Exit codes:
//   0  success
//   1  bad arguments, unreadable/malformed files, shape mismatches
//   2  numerical abort (bound overflow)
//   3  soundcheck found violations

#include <iosfwd>
#include <string>
#include <vector>

namespace rnncert::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitNumeric = 2;
inline constexpr int kExitViolation = 3;

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rnncert::cli
