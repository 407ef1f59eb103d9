#pragma once

#include <string>
#include <vector>

namespace pdn {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitSolver = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitUsage = 64;

/// Entry point of the pdnsim command line; args excludes the program name.
int cli_main(const std::vector<std::string>& args);

/// "10p", "10ps", "200n", "1e-9" -> seconds.
double parse_time(const std::string& text);

}  // namespace pdn
