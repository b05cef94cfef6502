#pragma once

#include <iosfwd>

namespace afc::cli {

// Exit codes: 0 success (including empty results), 1 runtime failure,
// 2 missing input file, 3 bad flags or malformed configuration.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitMissingFile = 2;
inline constexpr int kExitBadConfig = 3;

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace afc::cli
