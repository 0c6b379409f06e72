#include <iostream>

#include "agn/harness/cli.hpp"

int main(int argc, char** argv) { return agn::run_cli(argc, argv, std::cout, std::cerr); }
