#include <iostream>

#include "soliton_forge/cli.hpp"

int main(int argc, char** argv) { return soliton_forge::cli::run(argc, argv, std::cout, std::cerr); }
