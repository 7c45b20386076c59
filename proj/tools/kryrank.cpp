#include "kryrank/cli.hpp"

int main(int argc, char** argv) { return kryrank::cli_main(argc, argv); }
