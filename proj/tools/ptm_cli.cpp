#include <iostream>

#include "ptm/cli.hpp"

int main(int argc, char** argv) { return ptm::run_cli(argc, argv, std::cout, std::cerr); }
