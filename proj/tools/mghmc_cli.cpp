#include "mghmc/cli.hpp"

int main(int argc, char** argv) { return mghmc::cli_main(argc, argv); }
