#pragma once

namespace msred {

// Command-line entry point. Subcommands: run, phantom, denoise, check, norm.
// Returns 0 on success, 1 on usage/config errors, 2 on runtime errors.
int cli_main(int argc, const char* const* argv);

}  // namespace msred
