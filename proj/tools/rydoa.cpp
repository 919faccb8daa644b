#include <iostream>

#include "rydoa/cli.hpp"

int main(int argc, char** argv) { return rydoa::cli::run(argc, argv, std::cout, std::cerr); }
