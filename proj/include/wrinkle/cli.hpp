#pragma once

// Batch front end. One subcommand per process: solve | recover | energy |
// gamma | check. Options come from flags or a JSON config file (flags win).
// Exit codes: 0 ok, 1 numerical failure, 2 usage or config error.

namespace wrinkle {

int run_cli(int argc, const char* const* argv);

}  // namespace wrinkle
