#include <iostream>

#include "tmreach/cli.hpp"

int main(int argc, char** argv) { return tmreach::cli::run(argc, argv, std::cout, std::cerr); }
