#pragma once

#include <ostream>

namespace rydoa::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 2;
inline constexpr int exit_computation = 3;

// Entry point of the `rydoa` tool. Results go to `out` unless --out names a
// file; warnings and errors go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rydoa::cli
