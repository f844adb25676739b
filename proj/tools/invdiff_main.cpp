#include "invdiff/cli_commands.hpp"

int main(int argc, char** argv) { return invdiff::cli::run_cli(argc, argv); }
