#include <iostream>

#include "docrect/cli.hpp"

int main(int argc, char** argv) { return docrect::run_cli(argc, argv, std::cout, std::cerr); }
