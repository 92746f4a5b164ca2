#include <iostream>

#include "rndiff_cli/commands.hpp"

int main(int argc, char** argv) { return rndiff::cli::run(argc, argv, std::cout, std::cerr); }
