#include "aldi/cli.hpp"

int main(int argc, char** argv) { return aldi::cli::run_cli(argc, argv); }
