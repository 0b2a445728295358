#ifndef KINKSCAN_CLI_COMMANDS_HPP
#define KINKSCAN_CLI_COMMANDS_HPP

namespace kinkscan::cli {

// Entry point shared by the kinkscan binary and the CLI tests. Exit codes:
// 0 success (estimate: kink found), 1 clean negative (estimate: no kink;
// kernel: verification failed), 2 usage or runtime error.
int run_cli(int argc, const char* const* argv);

} // namespace kinkscan::cli

#endif
