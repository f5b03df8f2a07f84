#include <iostream>

#include "fedsel/cli.hpp"

int main(int argc, char** argv) { return fedsel::cli::parse_and_dispatch(argc, argv, std::cout, std::cerr); }
