#include <iostream>

#include "pctnpi/cli/commands.hpp"

int main(int argc, char** argv) { return pctnpi::cli::run_main(argc, argv, std::cout, std::cerr); }
