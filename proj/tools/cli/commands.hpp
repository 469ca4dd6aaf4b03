#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace panelms::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumeric = 3;

/**
 * Entry point for `panelms <subcommand> [flags]` with subcommands test,
 * cluster, simulate and preprocess. Every flag can also be set through an
 * environment variable PANELMS_<FLAG> (upper case, dashes as underscores).
 *
 * Returns 0 on success, 2 for input errors (bad flags, files, configs) and
 * 3 for numerical degeneracy.
 */
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace panelms::cli
