#pragma once

#include "ftprl/runner.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ftprl {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

/// Feasible-set syntax accepted by --set:
///   cube:<n>:<half-width>
///   box:<lo>..<hi>,<lo>..<hi>,...
///   l2ball:<n>:<radius>
///   lpball:<n>:<p>:<radius>        p may be "inf"
///   ellipsoid:<a1>,<a2>,...        {x : ||diag(a) x||_2 <= 1}
///   ellipsoid:<row>;<row>;...      full symmetric A, rows comma-separated
///   tball:<p>:<A as above>         {x : ||A x||_p <= 1}
FeasibleSet parse_set_spec(std::string_view text);

/// Inverse of parse_set_spec for the shapes it produces.
std::string format_set_spec(const FeasibleSet& set);

/// Generator syntax accepted by --generator:
///   heavy-tail[:<alpha>]  (default 1.5)
///   bad-family
///   sphere
///   uniform
///   quadratic-drift[:<jitter>]  (default 0.1)
GeneratorSpec parse_generator_spec(std::string_view text, std::uint64_t seed, std::size_t n,
                                   std::size_t rounds);

nlohmann::ordered_json report_to_json(const RegretReport& report);

/// Runs the command line `args` (without the program name). Output goes to
/// `out` unless --out is given; diagnostics go to `err`. Returns the exit
/// code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ftprl
