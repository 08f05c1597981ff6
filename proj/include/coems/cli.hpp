#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace coems::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitData = 1;
inline constexpr int kExitUsage = 2;

// coems <synth|fit|force|scan|calibrate|report> --config PATH [--out DIR]
//       [--seed N] [--set section.key=value]... [section.key=value]...
// `args` excludes the program name. Errors print one line
//   coems: error=<kind> message="<text>"
// on `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace coems::cli
