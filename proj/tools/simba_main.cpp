#include <iostream>

#include "simba/cli.hpp"

int main(int argc, char** argv) { return simba::cli::run(argc, argv, std::cout, std::cerr); }
