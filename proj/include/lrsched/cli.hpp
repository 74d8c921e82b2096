#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lrsched::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;   // bad flags, unreadable or malformed input
inline constexpr int kExitDomain = 3;  // valid syntax, invalid or degenerate values

// Runs one `lrsched` invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lrsched::cli
