#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace emoface::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;

/// Runs one command line (without the program name) and returns its exit
/// code. Nothing escapes as an exception.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace emoface::cli
