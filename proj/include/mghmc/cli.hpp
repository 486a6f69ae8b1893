#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mghmc {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitRuntimeError = 3;

/// Parses flags, runs the experiment and writes its output. Returns 0 on
/// success, 2 on configuration errors and 3 on runtime failures.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace mghmc
