#pragma once

#include <ostream>

#include "docrect/error.hpp"

namespace docrect {

/// 0 success, 2 usage or parameter problems, 3 bad data, 4 internal.
int exit_code(ErrorKind kind);

/// Entry point of the `docrect` tool. Subcommands: warp, rectify,
/// flow-convert, match, eval, eval-loss, make-weights.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace docrect
