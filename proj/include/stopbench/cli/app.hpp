#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stopbench::cli {

/// Exit codes of the command-line tool.
inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 1;
inline constexpr int exit_data = 2;

/// Entry point behind the `stopbench` binary; `args` excludes the program
/// name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args);

}  // namespace stopbench::cli
