#pragma once

#include <string>
#include <vector>

namespace sgl::cli {

inline constexpr const char* kVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNotConverged = 3;

/// Runs the command line `sglpath <args...>`; `args` excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace sgl::cli
