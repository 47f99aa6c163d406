#include <iostream>

#include "lfp/cli/cli.hpp"

int main(int argc, char** argv) { return lfp::run_cli(argc, argv, std::cout, std::cerr); }
