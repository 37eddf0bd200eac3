#include <iostream>

#include "ppa/cli.hpp"

int main(int argc, char** argv) { return ppa::cli_dispatch(argc, argv, std::cout, std::cerr); }
