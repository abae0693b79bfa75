#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace toricost
{

/// Exit codes of the command-line front end.
namespace exit_code
{
inline constexpr int ok = 0;
inline constexpr int internal = 1;
inline constexpr int validation = 2;
inline constexpr int numeric = 3;
inline constexpr int inconclusive = 4;
}  // namespace exit_code

/// Entry point of `toricost <command> ...`; args excludes the program name.
/// Commands: systems, cost, scan, classify, transport, plot.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace toricost
