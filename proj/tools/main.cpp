#include <iostream>

#include "rads/cli.hpp"

int main(int argc, char** argv) { return rads::cli::run(argc, argv, std::cout, std::cerr); }
