#include <iostream>

#include "aumcf/cli.hpp"

int main(int argc, char** argv) { return aumcf::run_cli(argc, argv, std::cout, std::cerr); }
