#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace twi::cli {

// Exit-status contract shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;       // argument/config parse or validation error
inline constexpr int kExitInfeasible = 3;  // drop probabilities exhaust the budget
inline constexpr int kExitToleranceBreach = 4;

// Dispatches pmf / optimize / experiment / validate. args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace twi::cli
