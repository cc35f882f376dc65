#include <iostream>

#include "fou/cli.hpp"

int main(int argc, char** argv) { return fou::cli::main(argc, argv, std::cout, std::cerr); }
