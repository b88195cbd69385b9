#include <iostream>

#include "finsler_cli/cli.hpp"

int main(int argc, char** argv) { return finsler::cli::run(argc, argv, std::cout, std::cerr); }
