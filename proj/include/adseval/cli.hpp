// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <ostream>

namespace adseval::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitAlignment = 3;
inline constexpr int kExitUsage = 64;

// Entry point of the `adseval` executable. Never throws; returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

struct SelftestOptions {
  std::uint64_t seed = 7;
  bool quick = false;
};

// Runs the embedded oracle checks and prints one PASS/FAIL line per check.
// Returns true when every check passes.
bool run_selftest(const SelftestOptions& options, std::ostream& out);

}  // namespace adseval::cli
