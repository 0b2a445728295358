#include "cli_commands.hpp"

int main(int argc, char** argv) { return kinkscan::cli::run_cli(argc, argv); }
