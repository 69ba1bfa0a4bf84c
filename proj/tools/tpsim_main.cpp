#include "tpsim/cli.hpp"

int main(int argc, char** argv) { return tpsim::cli_main(argc, argv); }
