#include <iostream>

#include "greyharvest/cli.hpp"

int main(int argc, char** argv) { return greyharvest::cli::run(argc, argv, std::cout, std::cerr); }
