#include <iostream>

#include "vfer/cli/commands.hpp"

int main(int argc, char** argv) { return vfer::cli::run(argc, argv, std::cout, std::cerr); }
