#pragma once

namespace frfm {

// Parses arguments and runs the selected subcommand.
// Exit codes: 0 success, 1 data/processing failure, 2 usage error.
int run_cli(int argc, char** argv);

}  // namespace frfm
