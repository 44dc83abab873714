#include "esn/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return esn::run_cli(argc, argv, std::cout, std::cerr); }
