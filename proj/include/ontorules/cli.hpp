#pragma once

#include <ostream>

namespace ontorules {

// Entry point of the `ontorules` tool: subcommands mine, post and serve.
// Returns the process exit status.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ontorules
